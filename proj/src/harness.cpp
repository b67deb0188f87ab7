#include "kvsopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "kvsopt/baselines.hpp"
#include "kvsopt/errors.hpp"

namespace kvs {

Classification classify_run(std::span<const double> candidate, std::span<const double> x_min, double thr) {
  if (candidate.size() != x_min.size()) throw std::invalid_argument("classify_run: dimension mismatch");
  double err = 0.0;
  for (std::size_t r = 0; r < candidate.size(); ++r) {
    const double e = std::abs(candidate[r] - x_min[r]);
    if (std::isnan(e)) {
      err = std::numeric_limits<double>::infinity();
      break;
    }
    err = std::max(err, e);
  }
  return {err < thr, err};
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "lkbo_fvse") return OptimizerKind::lkbo_fvse;
  if (name == "lkbo_fvse_sy") return OptimizerKind::lkbo_fvse_sy;
  if (name == "cbo") return OptimizerKind::cbo;
  if (name == "cbo_ffs") return OptimizerKind::cbo_ffs;
  throw ConfigError("optimizer: unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) noexcept {
  switch (kind) {
    case OptimizerKind::lkbo_fvse: return "lkbo_fvse";
    case OptimizerKind::lkbo_fvse_sy: return "lkbo_fvse_sy";
    case OptimizerKind::cbo: return "cbo";
    case OptimizerKind::cbo_ffs: return "cbo_ffs";
  }
  return "?";
}

RunReport run_optimizer(OptimizerKind kind, const OptimizerParams& params, const StochasticObjective& obj,
                        const SampleLaw& law, RngStream& stream, const RunOptions& options) {
  switch (kind) {
    case OptimizerKind::lkbo_fvse: return run_lkbo_fvse(params, obj, law, stream, options);
    case OptimizerKind::lkbo_fvse_sy: return run_lkbo_fvse_sy(params, obj, law, stream, options);
    case OptimizerKind::cbo: return run_cbo(params, obj, stream, options);
    case OptimizerKind::cbo_ffs: return run_cbo_ffs(params, obj, law, stream, options);
  }
  throw ConfigError("optimizer: unsupported optimizer");
}

void ExperimentSpec::validate() const {
  params.validate();
  law.validate();
  if (n_runs == 0) throw ConfigError("benchmark.n_runs must be at least 1");
  if (!(success_threshold > 0.0)) throw ConfigError("benchmark.threshold must be positive");
  if (!(record_rate_target > 0.0 && record_rate_target <= 1.0)) {
    throw ConfigError("benchmark.rate_target must lie in (0, 1]");
  }
  if (eval_iterate && *eval_iterate > params.n_it) {
    throw ConfigError("benchmark.iterate exceeds optimizer.n_it");
  }
  if (optimizer == OptimizerKind::cbo_ffs && (track_iterates || (eval_iterate && *eval_iterate != params.n_it))) {
    throw ConfigError("per-iterate tracking is not defined for cbo_ffs, whose candidate is an average over runs");
  }
  if (workers == 0) throw ConfigError("workers must be at least 1");
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The bounds touch 0 and 1 exactly at k = 0 and k = n.
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

BenchmarkResult run_benchmark(const ExperimentSpec& spec) {
  spec.validate();
  const StochasticObjective obj = make_objective(spec.objective, spec.objective_options);
  if (obj.minimizer.empty()) {
    throw ConfigError("objective '" + obj.name + "' has no known minimizer; success cannot be classified");
  }
  const std::size_t n_it = spec.params.n_it;
  const std::size_t eval_h = spec.eval_iterate.value_or(n_it);
  const bool at_final = eval_h == n_it;

  BenchmarkResult result;
  result.n_runs = spec.n_runs;
  result.per_run.resize(spec.n_runs);
  // errors[r][h], only with track_iterates.
  std::vector<std::vector<double>> errors(spec.track_iterates ? spec.n_runs : 0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr config_failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t r = next++; r < spec.n_runs; r = next++) {
      RunRecord& rec = result.per_run[r];
      rec.run = r;
      RngStream stream(spec.master_seed, r);
      RunOptions options;
      std::vector<double> eval_candidate;
      std::vector<double>* errs = spec.track_iterates ? &errors[r] : nullptr;
      if (errs) errs->assign(n_it + 1, std::numeric_limits<double>::infinity());
      if (errs || !at_final) {
        options.observer = [&, errs](const IterateView& view) {
          if (errs) (*errs)[view.h] = classify_run(view.consensus.point, obj.minimizer, spec.success_threshold).error;
          if (view.h == eval_h) eval_candidate = view.consensus.point;
        };
      }
      try {
        RunReport rep = run_optimizer(spec.optimizer, spec.params, obj, spec.law, stream, options);
        rec.candidate = at_final ? std::move(rep.candidate) : std::move(eval_candidate);
        rec.wall_time_s = rep.wall_time_s;
        rec.eval_count = rep.eval_count;
        const Classification c = classify_run(rec.candidate, obj.minimizer, spec.success_threshold);
        rec.success = c.success;
        rec.error = c.error;
      } catch (const NumericError& e) {
        rec.candidate.clear();
        rec.success = false;
        rec.error = std::numeric_limits<double>::infinity();
        rec.failure = e.what();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!config_failure) config_failure = std::current_exception();
        next = spec.n_runs;
      }
    }
  };

  const std::size_t n_threads = std::min(spec.workers, spec.n_runs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (config_failure) std::rethrow_exception(config_failure);

  double err_sum = 0.0;
  for (const RunRecord& rec : result.per_run) {
    if (rec.success) {
      ++result.n_success;
      err_sum += rec.error;
    }
  }
  result.success_rate = static_cast<double>(result.n_success) / static_cast<double>(spec.n_runs);
  if (result.n_success > 0) result.expected_error = err_sum / static_cast<double>(result.n_success);
  const Interval w = wilson_interval(result.n_success, spec.n_runs);
  result.wilson_lo = w.lo;
  result.wilson_hi = w.hi;

  if (spec.track_iterates) {
    result.success_by_iterate.assign(n_it + 1, 0.0);
    for (std::size_t h = 0; h <= n_it; ++h) {
      std::size_t k = 0;
      for (const auto& e : errors) k += e[h] < spec.success_threshold ? 1 : 0;
      result.success_by_iterate[h] = static_cast<double>(k) / static_cast<double>(spec.n_runs);
      if (!result.first_iter_at_target && result.success_by_iterate[h] >= spec.record_rate_target) {
        result.first_iter_at_target = h;
      }
    }
  }
  return result;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_cell(const BenchmarkResult& result, bool show_iterate) {
  char buf[96];
  const double pct = 100.0 * result.success_rate;
  std::string s;
  std::snprintf(buf, sizeof buf, "%.0f%%, ", pct);
  s += buf;
  if (result.expected_error) {
    std::snprintf(buf, sizeof buf, "%.4f", *result.expected_error);
    s += buf;
  } else {
    s += "NA";
  }
  if (show_iterate) {
    s += result.first_iter_at_target ? " (" + std::to_string(*result.first_iter_at_target) + ")" : " (NA)";
  }
  return s;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

void check_grid(const TableGrid& grid) {
  if (grid.cells.size() != grid.row_labels.size() * grid.col_labels.size()) {
    throw std::invalid_argument("table grid is not rectangular");
  }
}

nlohmann::ordered_json real_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void emit_table(const TableGrid& grid, const std::filesystem::path& dir) {
  check_grid(grid);
  std::filesystem::create_directories(dir);
  const std::size_t nc = grid.col_labels.size();
  {
    auto f = open_out(dir / "table.csv");
    f << csv_quote("");
    for (const auto& c : grid.col_labels) f << ',' << csv_quote(c);
    f << '\n';
    for (std::size_t i = 0; i < grid.row_labels.size(); ++i) {
      f << csv_quote(grid.row_labels[i]);
      for (std::size_t j = 0; j < nc; ++j) f << ',' << csv_quote(format_cell(grid.cells[i * nc + j], grid.show_iterate));
      f << '\n';
    }
    if (!f) throw Error("write failed: " + (dir / "table.csv").string());
  }
  {
    auto f = open_out(dir / "cells.csv");
    f << "row,col,n_runs,n_success,success_rate,wilson_lo,wilson_hi,expected_error,first_iter_at_target\n";
    for (std::size_t i = 0; i < grid.row_labels.size(); ++i) {
      for (std::size_t j = 0; j < nc; ++j) {
        const BenchmarkResult& r = grid.cells[i * nc + j];
        f << csv_quote(grid.row_labels[i]) << ',' << csv_quote(grid.col_labels[j]) << ',' << r.n_runs << ','
          << r.n_success << ',' << format_real(r.success_rate) << ',' << format_real(r.wilson_lo) << ','
          << format_real(r.wilson_hi) << ',' << (r.expected_error ? format_real(*r.expected_error) : "NA") << ','
          << (r.first_iter_at_target ? std::to_string(*r.first_iter_at_target) : "NA") << '\n';
      }
    }
    if (!f) throw Error("write failed: " + (dir / "cells.csv").string());
  }
}

void emit_per_run(const TableGrid& grid, const std::filesystem::path& dir) {
  check_grid(grid);
  std::filesystem::create_directories(dir);
  auto runs = open_out(dir / "per_run.jsonl");
  auto timing = open_out(dir / "timing.jsonl");
  const std::size_t nc = grid.col_labels.size();
  for (std::size_t i = 0; i < grid.row_labels.size(); ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      for (const RunRecord& rec : grid.cells[i * nc + j].per_run) {
        nlohmann::ordered_json o;
        o["row"] = grid.row_labels[i];
        o["col"] = grid.col_labels[j];
        o["run"] = rec.run;
        o["candidate"] = rec.candidate;
        o["success"] = rec.success;
        o["error"] = real_or_null(rec.error);
        o["eval_count"] = rec.eval_count;
        if (!rec.failure.empty()) o["failure"] = rec.failure;
        runs << o.dump() << '\n';

        nlohmann::ordered_json t;
        t["row"] = grid.row_labels[i];
        t["col"] = grid.col_labels[j];
        t["run"] = rec.run;
        t["wall_time_s"] = rec.wall_time_s;
        timing << t.dump() << '\n';
      }
    }
  }
  if (!runs || !timing) throw Error("write failed in " + dir.string());
}

}  // namespace kvs
