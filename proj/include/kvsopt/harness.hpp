#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kvsopt/dsmc.hpp"
#include "kvsopt/objectives.hpp"
#include "kvsopt/sampling.hpp"

namespace kvs {

struct Classification {
  bool success;
  double error;
};

/// error = |candidate - x_min|_inf, success = error < thr.
Classification classify_run(std::span<const double> candidate, std::span<const double> x_min, double thr);

enum class OptimizerKind { lkbo_fvse, lkbo_fvse_sy, cbo, cbo_ffs };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerKind kind) noexcept;

/// Runs one realization of the selected optimizer.
RunReport run_optimizer(OptimizerKind kind, const OptimizerParams& params, const StochasticObjective& obj,
                        const SampleLaw& law, RngStream& stream, const RunOptions& options = {});

struct ExperimentSpec {
  OptimizerKind optimizer = OptimizerKind::lkbo_fvse;
  OptimizerParams params;
  std::string objective = "stochastic_rastrigin";
  ObjectiveOptions objective_options{20};
  SampleLaw law;
  std::size_t n_runs = 100;
  double success_threshold = 0.25;
  double record_rate_target = 0.8;
  /// Track the consensus error at every iterate to locate first_iter_at_target.
  bool track_iterates = false;
  /// Iterate at which the headline metrics are taken; defaults to the final one.
  std::optional<std::size_t> eval_iterate;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

struct RunRecord {
  std::size_t run = 0;
  std::vector<double> candidate;
  bool success = false;
  double error = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t eval_count = 0;
  /// Empty unless the run failed numerically.
  std::string failure;
};

struct BenchmarkResult {
  std::size_t n_runs = 0;
  std::size_t n_success = 0;
  double success_rate = 0.0;
  std::optional<double> expected_error;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
  std::optional<std::size_t> first_iter_at_target;
  /// Success rate at every iterate; filled only with track_iterates.
  std::vector<double> success_by_iterate;
  std::vector<RunRecord> per_run;
};

struct Interval {
  double lo;
  double hi;
};

/// 95% Wilson score interval for k successes out of n.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

/// Runs n_runs realizations, run r on RngStream(master_seed, r), up to `workers` at a time.
BenchmarkResult run_benchmark(const ExperimentSpec& spec);

/// "100%, 0.0081 (6145)"; "NA" replaces the error when nothing succeeded.
std::string format_cell(const BenchmarkResult& result, bool show_iterate);

struct TableGrid {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  /// Row-major, row_labels.size() x col_labels.size().
  std::vector<BenchmarkResult> cells;
  bool show_iterate = false;
};

/// Writes table.csv (wide, formatted cells) and cells.csv (long form, full precision).
void emit_table(const TableGrid& grid, const std::filesystem::path& dir);

/// One JSON object per (cell, run) to per_run.jsonl and the matching timings to timing.jsonl.
void emit_per_run(const TableGrid& grid, const std::filesystem::path& dir);

/// printf("%.17g").
std::string format_real(double v);

}  // namespace kvs
