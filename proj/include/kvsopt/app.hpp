#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kvsopt/config.hpp"
#include "kvsopt/harness.hpp"
#include "kvsopt/moments.hpp"

namespace kvs {

struct CliOptions {
  std::filesystem::path config_path;  // empty: schema defaults only
  std::vector<std::string> overrides;
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

/// Loads the config file, then applies overrides, then --seed and --workers.
Config resolve_config(const CliOptions& cli);

OptimizerParams optimizer_params_from(const Config& cfg);
ObjectiveOptions objective_options_from(const Config& cfg);
StochasticObjective objective_from(const Config& cfg);
SampleLaw law_from(const Config& cfg, std::size_t k);
ExperimentSpec experiment_from(const Config& cfg);

/// Per-iterate moments averaged over realizations r = 0..n_runs-1 on RngStream(seed, r).
struct AveragedTrace {
  std::vector<MomentState> mean;
  /// Per run: sqrt(|m - x_tilde|^2 + V^2) at the final iterate.
  std::vector<double> terminal_distances;
};

AveragedTrace averaged_empirical_trace(OptimizerKind kind, const OptimizerParams& params,
                                       const StochasticObjective& obj, const SampleLaw& law, std::size_t n_runs,
                                       std::uint64_t seed, std::span<const double> x_tilde);

/// Subcommands throw on failure; run_command maps errors to exit codes.
void cmd_optimize(const CliOptions& cli, std::ostream& out);
void cmd_benchmark(const CliOptions& cli, std::ostream& out);
void cmd_moments(const CliOptions& cli, std::ostream& out);
void cmd_diagnose(const CliOptions& cli, std::ostream& out);

/// 0 on success, 2 for configuration errors, 3 for numerical failures, 1 otherwise.
int run_command(std::string_view subcommand, const CliOptions& cli, std::ostream& out, std::ostream& err);

}  // namespace kvs
