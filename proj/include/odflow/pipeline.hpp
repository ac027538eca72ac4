#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "odflow/gravity.hpp"
#include "odflow/ingestion.hpp"
#include "odflow/transition.hpp"
#include "odflow/zone_geometry.hpp"

namespace odflow {

enum class CostKind { adjacency, centroid, nearest_corner };

CostMatrix build_cost(const ZoneSet& zones, CostKind kind,
                      double snap_tolerance = 0.0);

struct EstimateOptions {
  std::int64_t bucket_seconds = 900;
  Count target_total = 1'000'000;
  double noise_epsilon = 1e-4;  // 0 disables objective randomization
  int randomizations = 4;
  std::uint64_t seed = 0;
  std::vector<Count> step_counts;         // extra i-step matrices to build
  std::vector<double> histogram_weights;  // empty: no duration mixture
};

struct PairEstimate {
  std::int64_t from_time = 0;
  std::int64_t to_time = 0;
  Marginals marginals;          // normalized to the target total
  double mean_objective = 0.0;  // over the noise randomizations
};

struct EstimateResult {
  std::vector<RejectedLine> rejects;
  SnapshotSeries series;
  std::vector<PairEstimate> pairs;
  Matrix averaged_flow;  // mean of all per-pair, per-randomization solutions
  StochasticMatrix one_step;
  std::vector<std::pair<Count, StochasticMatrix>> multi_step;
  std::optional<StochasticMatrix> mixed;
};

// Full estimation pipeline: parse, aggregate, normalize each consecutive
// pair to the target total, solve the flow LP once per noise randomization,
// average all solutions, and derive the requested transition matrices.
EstimateResult run_estimate(std::istream& presence, const ZoneSet& zones,
                            const CostMatrix& cost,
                            const EstimateOptions& options);

// Square grid of unit-square zones (adjacent cells share corners), ids
// Z0001, Z0002, ... in row-major order.
ZoneSet make_grid_zones(std::size_t count);

struct SyntheticConfig {
  std::size_t zone_count = 16;
  Count total = 1'000'000;
  std::uint64_t seed = 0;
  enum class TruthKind { diagonal, optimal, random_feasible };
  TruthKind truth_kind = TruthKind::optimal;
  CostKind cost_kind = CostKind::adjacency;
  GravityParams gravity_params;
};

struct SyntheticResult {
  ZoneSet zones;
  CostMatrix cost;
  FlowMatrix ground_truth;
  double truth_objective = 0.0;
  bool truth_is_optimal = false;
  Marginals marginals;
  LpSolution estimate;
  GravityFit gravity;
  FlowComparison estimate_score;  // estimate vs ground truth
  FlowComparison gravity_score;   // gravity fit vs ground truth
};

// Generates a ground-truth flow on synthetic grid zones, derives its
// marginals, runs the LP estimator and the gravity baseline, and scores both
// against the truth.
SyntheticResult run_synthetic(const SyntheticConfig& config);

}  // namespace odflow
