#include "kvsopt/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "kvsopt/diagnostics.hpp"
#include "kvsopt/errors.hpp"

namespace kvs {

Config resolve_config(const CliOptions& cli) {
  Config cfg = cli.config_path.empty() ? Config{} : Config::load(cli.config_path);
  for (const auto& o : cli.overrides) cfg.apply_override(o);
  if (cli.seed) cfg.set("seed", std::to_string(*cli.seed));
  if (cli.workers) cfg.set("workers", std::to_string(*cli.workers));
  return cfg;
}

OptimizerParams optimizer_params_from(const Config& cfg) {
  OptimizerParams p;
  p.lambda = cfg.get_real("optimizer.lambda", p.lambda);
  p.sigma = cfg.get_real("optimizer.sigma", p.sigma);
  p.alpha = cfg.get_real("optimizer.alpha", p.alpha);
  p.dt = cfg.get_real("optimizer.dt", p.dt);
  p.eta = cfg.get_optional_real("optimizer.eta");
  p.epsilon = cfg.get_real("optimizer.epsilon", p.epsilon);
  p.N = cfg.get_size("optimizer.N", p.N);
  p.M = cfg.get_size("sampling.M", p.M);
  p.n_it = cfg.get_size("optimizer.n_it", p.n_it);
  p.diffusion = parse_diffusion(cfg.get_string("optimizer.diffusion", "anisotropic"));
  p.n_sY = cfg.get_size("optimizer.n_sY", p.n_sY);
  p.init_lo = cfg.get_real("optimizer.init_lo", p.init_lo);
  p.init_hi = cfg.get_real("optimizer.init_hi", p.init_hi);
  p.validate();
  return p;
}

ObjectiveOptions objective_options_from(const Config& cfg) {
  ObjectiveOptions o;
  o.dim = cfg.get_size("objective.dim", 20);
  o.B = cfg.get_real("objective.B", o.B);
  o.C = cfg.get_real("objective.C", o.C);
  o.mean_y1 = cfg.get_real("objective.mean_y1", o.mean_y1);
  o.mean_y2 = cfg.get_real("objective.mean_y2", o.mean_y2);
  if (o.dim == 0) throw ConfigError("objective.dim must be positive");
  return o;
}

StochasticObjective objective_from(const Config& cfg) {
  return make_objective(cfg.get_string("objective.name", "stochastic_rastrigin"), objective_options_from(cfg));
}

SampleLaw law_from(const Config& cfg, std::size_t k) {
  SampleLaw law = make_law(cfg.get_string("sampling.theta", "uniform"), k);
  law.validate();
  return law;
}

ExperimentSpec experiment_from(const Config& cfg) {
  ExperimentSpec s;
  s.optimizer = parse_optimizer(cfg.get_string("optimizer", "lkbo_fvse"));
  s.params = optimizer_params_from(cfg);
  s.objective = cfg.get_string("objective.name", "stochastic_rastrigin");
  s.objective_options = objective_options_from(cfg);
  const StochasticObjective obj = make_objective(s.objective, s.objective_options);
  s.law = law_from(cfg, obj.dim_y);
  s.n_runs = cfg.get_size("benchmark.n_runs", s.n_runs);
  s.success_threshold = cfg.get_real("benchmark.threshold", s.success_threshold);
  s.record_rate_target = cfg.get_real("benchmark.rate_target", s.record_rate_target);
  s.track_iterates = cfg.get_bool("benchmark.track_iterates", false);
  if (cfg.has("benchmark.iterate")) s.eval_iterate = cfg.get_size("benchmark.iterate", s.params.n_it);
  s.master_seed = cfg.get_u64("seed", 0);
  s.workers = cfg.get_size("workers", 1);
  s.validate();
  return s;
}

AveragedTrace averaged_empirical_trace(OptimizerKind kind, const OptimizerParams& params,
                                       const StochasticObjective& obj, const SampleLaw& law, std::size_t n_runs,
                                       std::uint64_t seed, std::span<const double> x_tilde) {
  if (n_runs == 0) throw ConfigError("moments.n_runs must be at least 1");
  if (x_tilde.size() != obj.dim_x) throw ConfigError("moments.x_tilde must have objective.dim entries");
  const std::size_t d = obj.dim_x;
  AveragedTrace out;
  out.mean.resize(params.n_it + 1);
  for (std::size_t h = 0; h <= params.n_it; ++h) {
    out.mean[h].m.assign(d, 0.0);
    out.mean[h].t = static_cast<double>(h) * params.dt;
  }
  for (std::size_t r = 0; r < n_runs; ++r) {
    RngStream stream(seed, r);
    RunOptions options;
    options.record_trace = true;
    const RunReport rep = run_optimizer(kind, params, obj, law, stream, options);
    for (const TraceRow& row : rep.trace) {
      if (row.h > params.n_it) continue;
      MomentState& s = out.mean[row.h];
      for (std::size_t k = 0; k < d; ++k) s.m[k] += row.m[k];
      s.V += row.V;
    }
    const TraceRow& last = rep.trace.back();
    double dist2 = last.V * last.V;
    for (std::size_t k = 0; k < d; ++k) dist2 += (last.m[k] - x_tilde[k]) * (last.m[k] - x_tilde[k]);
    out.terminal_distances.push_back(std::sqrt(dist2));
  }
  const double n = static_cast<double>(n_runs);
  for (MomentState& s : out.mean) {
    for (double& v : s.m) v /= n;
    s.V /= n;
  }
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

void write_moment_csv(const std::filesystem::path& p, const std::vector<MomentState>& rows) {
  auto f = open_out(p);
  const std::size_t d = rows.empty() ? 0 : rows.front().m.size();
  f << "t";
  for (std::size_t k = 0; k < d; ++k) f << (d == 1 ? ",m" : ",m_" + std::to_string(k + 1));
  f << ",V\n";
  for (const MomentState& s : rows) {
    f << format_real(s.t);
    for (double v : s.m) f << ',' << format_real(v);
    f << ',' << format_real(s.V) << '\n';
  }
  if (!f) throw Error("write failed: " + p.string());
}

std::string compact_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double terminal_distance(const MomentState& s, std::span<const double> x_tilde) {
  double d2 = s.V * s.V;
  for (std::size_t k = 0; k < s.m.size(); ++k) d2 += (s.m[k] - x_tilde[k]) * (s.m[k] - x_tilde[k]);
  return std::sqrt(d2);
}

}  // namespace

void cmd_optimize(const CliOptions& cli, std::ostream& out) {
  const Config cfg = resolve_config(cli);
  const OptimizerKind kind = parse_optimizer(cfg.get_string("optimizer", "lkbo_fvse"));
  const OptimizerParams params = optimizer_params_from(cfg);
  const StochasticObjective obj = objective_from(cfg);
  const SampleLaw law = law_from(cfg, obj.dim_y);
  const bool trace = cfg.get_bool("optimize.trace", false);

  RngStream stream(cfg.get_u64("seed", 0), 0);
  RunOptions options;
  options.record_trace = trace;
  const RunReport rep = run_optimizer(kind, params, obj, law, stream, options);
  const SampleBatch fresh = draw_batch(law, params.M, stream);
  const double fhat = eval_fhat_M(obj, rep.candidate, fresh);

  if (trace) {
    auto f = open_out(cli.output_dir / "trace.csv");
    const std::size_t d = obj.dim_x;
    f << "h";
    for (std::size_t k = 0; k < d; ++k) f << ",m_" << k + 1;
    f << ",V";
    for (std::size_t k = 0; k < d; ++k) f << ",cp_" << k + 1;
    f << '\n';
    for (const TraceRow& row : rep.trace) {
      f << row.h;
      for (double v : row.m) f << ',' << format_real(v);
      f << ',' << format_real(row.V);
      for (double v : row.cp) f << ',' << format_real(v);
      f << '\n';
    }
  }

  nlohmann::ordered_json j;
  j["optimizer"] = std::string(to_string(kind));
  j["candidate"] = rep.candidate;
  j["fhat_M"] = fhat;
  if (obj.has_expectation()) j["f"] = obj.expectation(rep.candidate);
  j["iterations"] = rep.iterations;
  j["n_collide"] = rep.n_collide;
  j["eval_count"] = rep.eval_count;
  j["wall_time_s"] = rep.wall_time_s;
  out << j.dump() << '\n';
}

void cmd_benchmark(const CliOptions& cli, std::ostream& out) {
  const Config base = resolve_config(cli);
  auto rows = base.get_list("benchmark.rows");
  auto cols = base.get_list("benchmark.cols");
  if (rows.empty()) rows.push_back("");
  if (cols.empty()) cols.push_back("");
  TableGrid grid;
  grid.row_labels = base.get_list("benchmark.row_labels");
  grid.col_labels = base.get_list("benchmark.col_labels");
  const auto fill_labels = [](std::vector<std::string>& labels, const std::vector<std::string>& entries,
                              const char* key) {
    if (labels.empty()) {
      for (const auto& e : entries) labels.push_back(e.empty() ? "all" : e);
    } else if (labels.size() != entries.size()) {
      throw ConfigError(std::string(key) + " must have one label per entry");
    }
  };
  fill_labels(grid.row_labels, rows, "benchmark.row_labels");
  fill_labels(grid.col_labels, cols, "benchmark.col_labels");

  const auto apply_entry = [](Config& cfg, const std::string& entry) {
    if (entry.empty()) return;
    std::string_view s = entry;
    while (true) {
      const auto p = s.find('&');
      const std::string a = trim(s.substr(0, p));
      if (!a.empty()) cfg.apply_override(a);
      if (p == std::string_view::npos) break;
      s.remove_prefix(p + 1);
    }
  };

  // Validate every cell before spending time on any of them.
  std::vector<ExperimentSpec> specs;
  for (const auto& r : rows) {
    for (const auto& c : cols) {
      Config cell = base;
      apply_entry(cell, r);
      apply_entry(cell, c);
      specs.push_back(experiment_from(cell));
      grid.show_iterate = grid.show_iterate || specs.back().track_iterates;
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    grid.cells.push_back(run_benchmark(specs[i]));
    out << grid.row_labels[i / cols.size()] << " | " << grid.col_labels[i % cols.size()] << ": "
        << format_cell(grid.cells.back(), grid.show_iterate) << '\n';
  }
  emit_table(grid, cli.output_dir);
  emit_per_run(grid, cli.output_dir);
}

void cmd_moments(const CliOptions& cli, std::ostream& out) {
  const Config cfg = resolve_config(cli);
  const OptimizerKind kind = parse_optimizer(cfg.get_string("optimizer", "lkbo_fvse"));
  const OptimizerParams base = optimizer_params_from(cfg);
  const StochasticObjective obj = objective_from(cfg);
  const SampleLaw law = law_from(cfg, obj.dim_y);
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const std::size_t n_runs = cfg.get_size("moments.n_runs", 1);
  const double rel_tol = cfg.get_real("moments.rel_tol", 1e-8);
  const double abs_tol = cfg.get_real("moments.abs_tol", 1e-12);

  std::vector<double> alphas = cfg.get_reals("moments.alphas");
  if (alphas.empty()) alphas.push_back(base.alpha);
  std::vector<std::pair<double, double>> boxes;
  for (const auto& b : cfg.get_list("moments.init_boxes")) {
    const auto colon = b.find(':');
    if (colon == std::string::npos) throw ConfigError("moments.init_boxes: expected lo:hi, got '" + b + "'");
    Config tmp;
    tmp.set("optimizer.init_lo", trim(std::string_view(b).substr(0, colon)));
    tmp.set("optimizer.init_hi", trim(std::string_view(b).substr(colon + 1)));
    boxes.emplace_back(tmp.get_real("optimizer.init_lo", 0), tmp.get_real("optimizer.init_hi", 0));
  }
  if (boxes.empty()) boxes.emplace_back(base.init_lo, base.init_hi);
  std::vector<double> x_tilde = cfg.get_reals("moments.x_tilde");
  if (x_tilde.empty()) x_tilde = obj.minimizer;
  if (x_tilde.size() != obj.dim_x) {
    throw ConfigError("moments.x_tilde must be given when the objective has no known minimizer");
  }

  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& [lo, hi] : boxes) {
    OptimizerParams p = base;
    p.init_lo = lo;
    p.init_hi = hi;
    p.validate();
    const std::string box_label = boxes.size() > 1 ? "_box_" + compact_real(lo) + "_" + compact_real(hi) : "";
    std::optional<MomentState> s0;
    for (double alpha : alphas) {
      p.alpha = alpha;
      const std::string label = (alphas.size() > 1 ? "_alpha_" + compact_real(alpha) : "") + box_label;
      const AveragedTrace tr = averaged_empirical_trace(kind, p, obj, law, n_runs, seed, x_tilde);
      write_moment_csv(cli.output_dir / ("empirical_trace" + label + ".csv"), tr.mean);
      if (!s0) s0 = tr.mean.front();
      double mean_dist = 0.0;
      for (double v : tr.terminal_distances) mean_dist += v;
      mean_dist /= static_cast<double>(tr.terminal_distances.size());
      nlohmann::ordered_json j;
      j["trace"] = "empirical" + label;
      j["alpha"] = alpha;
      j["init_box"] = {lo, hi};
      j["terminal_m"] = tr.mean.back().m;
      j["terminal_V"] = tr.mean.back().V;
      j["mean_terminal_distance"] = mean_dist;
      summary.push_back(j);
    }

    const ApproxSystemParams ap = approx_params_for(p, obj.dim_x, x_tilde);
    std::vector<double> times(p.n_it + 1);
    for (std::size_t h = 0; h <= p.n_it; ++h) times[h] = static_cast<double>(h) * p.dt;
    MomentState start = *s0;
    start.t = 0.0;
    const auto ode = integrate_moments(ap, start, times, rel_tol, abs_tol);
    write_moment_csv(cli.output_dir / ("ode_trace" + box_label + ".csv"), ode);
    const JacobianSpectrum spec = jacobian_eigen(ap);
    nlohmann::ordered_json j;
    j["trace"] = "ode" + box_label;
    j["init_box"] = {lo, hi};
    j["terminal_m"] = ode.back().m;
    j["terminal_V"] = ode.back().V;
    j["terminal_distance"] = terminal_distance(ode.back(), x_tilde);
    j["eig_m"] = spec.eig_m;
    j["eig_V"] = spec.eig_V;
    j["stable"] = spec.stable;
    summary.push_back(j);
  }
  out << summary.dump() << '\n';
}

void cmd_diagnose(const CliOptions& cli, std::ostream& out) {
  const Config cfg = resolve_config(cli);
  const OptimizerParams params = optimizer_params_from(cfg);
  const StochasticObjective obj = objective_from(cfg);
  const SampleLaw law = law_from(cfg, obj.dim_y);
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const double kap = kappa(params.diffusion, obj.dim_x);

  ConvergenceReport report;
  if (const auto user = cfg.get_optional_real("diagnose.c_alpha")) {
    if (!(*user >= 1.0)) throw ConfigError("diagnose.c_alpha must be at least 1");
    report.C_alpha = *user;
  } else {
    RngStream stream(seed, 0);
    const CAlphaEstimate est =
        estimate_c_alpha(obj, law, params.M, params.alpha, cfg.get_size("diagnose.n_mc", 10000), stream);
    report.C_alpha = est.value;
    report.estimator_std_err = est.std_err;
  }
  const MuResult mu = convergence_mu(params.lambda, params.sigma, kap, report.C_alpha);
  report.mu = mu.mu;
  report.mu_positive = mu.positive;

  if (cfg.get_bool("diagnose.nu", false) && mu.positive) {
    const double w = params.init_hi - params.init_lo;
    NuInputs in{};
    in.mu = mu.mu;
    in.C_alpha = report.C_alpha;
    in.alpha = params.alpha;
    in.lambda = params.lambda;
    in.sigma = params.sigma;
    in.kappa = kap;
    in.c1 = cfg.get_real("diagnose.c1", 0.0);
    in.c2 = cfg.get_real("diagnose.c2", 0.0);
    in.f_lower = cfg.get_real("diagnose.f_lower", 0.0);
    in.V0 = cfg.get_optional_real("diagnose.V0").value_or(0.5 * static_cast<double>(obj.dim_x) * w * w / 12.0);
    if (const auto on = cfg.get_optional_real("diagnose.omega_norm")) {
      in.omega_norm = *on;
    } else {
      RngStream stream(seed, 1);
      in.omega_norm = estimate_omega_norm(obj.expectation, obj.dim_x, params.init_lo, params.init_hi, params.alpha,
                                          cfg.get_size("diagnose.n_mc", 10000), stream)
                          .value;
    }
    const NuResult nu = convergence_nu(in);
    report.nu = nu.nu;
    report.nu_feasible = nu.feasible;
  }
  out << report.to_json() << '\n';
}

int run_command(std::string_view subcommand, const CliOptions& cli, std::ostream& out, std::ostream& err) {
  try {
    if (subcommand == "optimize") {
      cmd_optimize(cli, out);
    } else if (subcommand == "benchmark") {
      cmd_benchmark(cli, out);
    } else if (subcommand == "moments") {
      cmd_moments(cli, out);
    } else if (subcommand == "diagnose") {
      cmd_diagnose(cli, out);
    } else {
      err << "error: unknown subcommand '" << subcommand << "'\n";
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BoundsUnavailable& e) {
    err << "config error: " << e.what() << "; supply diagnose.c_alpha\n";
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace kvs
