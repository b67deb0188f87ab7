#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kvsopt/app.hpp"

namespace {

std::string keys_footer(const char* subcommand) {
  std::ostringstream s;
  s << "\nConfig keys read by " << subcommand << ":\n";
  for (const auto& k : kvs::keys_for(subcommand)) {
    s << "  " << k.key << " (" << k.type;
    if (!k.default_value.empty()) s << ", default " << k.default_value;
    s << ")  " << k.description << '\n';
  }
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kvsopt: variable-sample kinetic consensus optimization"};
  app.require_subcommand(1);

  kvs::CliOptions opts;
  std::string config_path;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  const char* names[] = {"optimize", "benchmark", "moments", "diagnose"};
  const char* blurbs[] = {"run one optimizer realization", "run a grid of multi-run experiments",
                          "write empirical and ODE moment traces", "report the convergence conditions"};
  for (int i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", config_path, "config file");
    sub->add_option("--seed", seed, "master seed, overrides the seed key");
    sub->add_option("--output-dir", output_dir, "directory for output files (created if missing)");
    sub->add_option("--workers", workers, "concurrent runs, overrides the workers key");
    sub->add_option("--overrides", opts.overrides, "section.key=value assignments")->expected(0, -1);
    sub->footer(keys_footer(names[i]));
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  opts.config_path = config_path;
  opts.output_dir = output_dir;
  if (chosen->count("--seed") > 0) opts.seed = seed;
  if (chosen->count("--workers") > 0) opts.workers = workers;
  return kvs::run_command(chosen->get_name(), opts, std::cout, std::cerr);
}
