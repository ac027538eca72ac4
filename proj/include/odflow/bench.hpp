#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "odflow/polytope.hpp"

namespace odflow {

// Marginals drawn as two independent uniform points of the (n-1)-simplex,
// scaled to total_mass and rounded with the largest-remainder rule so both
// sums are exact. Deterministic per seed.
Marginals sample_simplex_marginals(std::size_t n, Count total_mass,
                                   std::uint64_t seed);

struct BenchConfig {
  std::vector<Count> sizes;  // strictly increasing
  int trials = 5;            // >= 3; one extra warm-up trial is discarded
  std::uint64_t seed = 0;
  Count total_mass = 1'000'000;
  bool run_closed_form = true;
  bool run_min_cost_flow = false;
  // The general solver allocates dense n x n state; refuse above this cap.
  Count min_cost_flow_cap = 4096;
  bool parallel_trials = false;
  // Batch repetitions until a measurement lasts at least this long, so
  // microsecond-scale solves are not lost in timer noise.
  double min_measure_seconds = 1e-3;
};

struct BenchRow {
  std::string solver;  // "closed_form" or "min_cost_flow"
  Count size = 0;
  int trials = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
  double min_seconds = 0.0;
};

struct BenchTable {
  std::vector<BenchRow> rows;
};

// Timed solves on independently sampled marginals: the closed form gets the
// two-level 0/1 cost, the general solver random integer costs in [0, 9].
// Each closed-form trial is cross-checked against the identity
// z = k - |eta - gamma|_1 / 2.
BenchTable run_bench(const BenchConfig& config);

// Least-squares slope of log2(min_seconds) against log2(n) for one solver's
// rows. Needs at least two sizes.
double fit_loglog_slope(const BenchTable& table, const std::string& solver);

void write_bench_csv(const BenchTable& table, std::ostream& out);

// Self-contained SVG log-log line chart, one series per solver.
void write_bench_svg(const BenchTable& table, std::ostream& out);

}  // namespace odflow
