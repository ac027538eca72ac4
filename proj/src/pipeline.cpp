#include "odflow/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "odflow/bench.hpp"

namespace odflow {

CostMatrix build_cost(const ZoneSet& zones, CostKind kind,
                      double snap_tolerance) {
  switch (kind) {
    case CostKind::adjacency: {
      AdjacencyOptions options;
      options.snap_tolerance = snap_tolerance;
      return cost_adjacency(zones, options);
    }
    case CostKind::centroid:
      return cost_centroid(zones);
    case CostKind::nearest_corner:
      return cost_nearest_corner(zones);
  }
  throw std::invalid_argument("unknown cost kind");
}

EstimateResult run_estimate(std::istream& presence, const ZoneSet& zones,
                            const CostMatrix& cost,
                            const EstimateOptions& options) {
  if (cost.size() != static_cast<Eigen::Index>(zones.size())) {
    throw std::invalid_argument("cost matrix dimension does not match zone set");
  }
  if (options.randomizations < 1) {
    throw std::invalid_argument("need at least one randomization");
  }
  if (options.noise_epsilon < 0.0) {
    throw std::invalid_argument("noise amplitude must be >= 0");
  }
  for (Count step : options.step_counts) {
    if (step < 1) throw std::invalid_argument("step counts must be >= 1");
  }

  ParsedPresence parsed = parse_presence(presence, zones);
  SnapshotSeries series =
      aggregate(parsed.records, zones, options.bucket_seconds);
  auto pairs = pair_stream(series);

  std::vector<FlowMatrix> flows;
  std::vector<PairEstimate> pair_estimates;
  flows.reserve(pairs.size() * static_cast<std::size_t>(options.randomizations));
  std::uint64_t stream = 0;
  for (const auto& [from, to] : pairs) {
    Marginals marginals = normalize_pair(from, to, options.target_total);
    double objective_sum = 0.0;
    for (int r = 0; r < options.randomizations; ++r, ++stream) {
      LpSolution solution =
          options.noise_epsilon > 0.0
              ? solve_lp(marginals, perturb_costs(cost, options.noise_epsilon,
                                                  derive_seed(options.seed, stream)))
              : solve_lp(marginals, cost);
      objective_sum += solution.objective;
      flows.push_back(std::move(solution.flow));
    }
    pair_estimates.push_back(
        {from.interval_end, to.interval_end, std::move(marginals),
         objective_sum / static_cast<double>(options.randomizations)});
  }

  Matrix averaged = average_flows(flows);
  StochasticMatrix one_step = row_normalize(averaged);

  std::vector<std::pair<Count, StochasticMatrix>> multi_step;
  multi_step.reserve(options.step_counts.size());
  for (Count step : options.step_counts) {
    multi_step.emplace_back(step, k_step_power(one_step, step));
  }

  std::optional<StochasticMatrix> mixed;
  if (!options.histogram_weights.empty()) {
    DurationHistogram histogram = make_duration_histogram(
        options.histogram_weights,
        static_cast<double>(options.bucket_seconds));
    std::vector<StochasticMatrix> steps;
    steps.reserve(histogram.weights.size());
    for (std::size_t i = 0; i < histogram.weights.size(); ++i) {
      steps.push_back(k_step_power(one_step, static_cast<Count>(i) + 1));
    }
    mixed = histogram_mix(steps, histogram);
  }

  return EstimateResult{std::move(parsed.rejects), std::move(series),
                        std::move(pair_estimates), std::move(averaged),
                        std::move(one_step),       std::move(multi_step),
                        std::move(mixed)};
}

ZoneSet make_grid_zones(std::size_t count) {
  if (count < 1) throw std::invalid_argument("need at least one zone");
  std::size_t width = 1;
  while (width * width < count) ++width;

  std::vector<ZonePolygon> zones;
  zones.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double x = static_cast<double>(k % width);
    double y = static_cast<double>(k / width);
    char id[32];
    std::snprintf(id, sizeof(id), "Z%04zu", k + 1);
    zones.push_back({id,
                     {{x, y}, {x + 1.0, y}, {x + 1.0, y + 1.0}, {x, y + 1.0}}});
  }
  return ZoneSet(std::move(zones));
}

namespace {

// Feasible but generally suboptimal flow: northwest-corner fill applied in a
// randomly permuted basis.
FlowMatrix random_feasible_flow(const Marginals& marginals, std::uint64_t seed) {
  const Count n = static_cast<Count>(marginals.size());
  std::mt19937_64 rng(seed);
  std::vector<Count> row_order(static_cast<std::size_t>(n));
  std::vector<Count> col_order(static_cast<std::size_t>(n));
  std::iota(row_order.begin(), row_order.end(), Count{0});
  std::iota(col_order.begin(), col_order.end(), Count{0});
  std::shuffle(row_order.begin(), row_order.end(), rng);
  std::shuffle(col_order.begin(), col_order.end(), rng);

  std::vector<Count> rows(static_cast<std::size_t>(n));
  std::vector<Count> cols(static_cast<std::size_t>(n));
  for (Count i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] =
        marginals.gamma()[static_cast<std::size_t>(row_order[static_cast<std::size_t>(i)])];
    cols[static_cast<std::size_t>(i)] =
        marginals.eta()[static_cast<std::size_t>(col_order[static_cast<std::size_t>(i)])];
  }
  FlowMatrix permuted = northwest_corner_fill(rows, cols);
  std::vector<FlowEntry> entries;
  entries.reserve(permuted.nonzero_count());
  for (const FlowEntry& e : permuted.entries()) {
    entries.push_back({row_order[static_cast<std::size_t>(e.row)],
                       col_order[static_cast<std::size_t>(e.col)], e.value});
  }
  return FlowMatrix::from_entries(n, n, std::move(entries));
}

// Row-major accumulation; keep this evaluation order in sync with the
// objective computed by the solvers so equal flows give bitwise equal
// objectives.
double flow_objective(const FlowMatrix& flow, const CostMatrix& cost) {
  double objective = 0.0;
  for (const FlowEntry& e : flow.entries()) {
    objective += static_cast<double>(e.value) * cost.at(e.row, e.col);
  }
  return objective;
}

}  // namespace

SyntheticResult run_synthetic(const SyntheticConfig& config) {
  if (config.zone_count < 1) throw std::invalid_argument("need at least one zone");
  if (config.total < 1) throw std::invalid_argument("total must be >= 1");

  ZoneSet zones = make_grid_zones(config.zone_count);
  CostMatrix cost = build_cost(zones, config.cost_kind);
  const Count n = static_cast<Count>(zones.size());

  Marginals sampled =
      sample_simplex_marginals(zones.size(), config.total, config.seed);

  FlowMatrix truth(n, n);
  bool truth_is_optimal = false;
  switch (config.truth_kind) {
    case SyntheticConfig::TruthKind::diagonal: {
      std::vector<FlowEntry> entries;
      for (Count i = 0; i < n; ++i) {
        Count v = sampled.gamma()[static_cast<std::size_t>(i)];
        if (v > 0) entries.push_back({i, i, v});
      }
      truth = FlowMatrix::from_entries(n, n, std::move(entries));
      truth_is_optimal = true;  // zero-cost diagonal is unbeatable
      break;
    }
    case SyntheticConfig::TruthKind::optimal:
      truth = solve_lp(sampled, cost).flow;
      truth_is_optimal = true;
      break;
    case SyntheticConfig::TruthKind::random_feasible:
      truth = random_feasible_flow(sampled, derive_seed(config.seed, 1));
      break;
  }

  Marginals marginals = check_feasible(truth.row_sums(), truth.col_sums());
  LpSolution estimate = solve_lp(marginals, cost);
  double truth_objective = flow_objective(truth, cost);

  Vector production(n);
  Vector attraction(n);
  for (Count i = 0; i < n; ++i) {
    production(i) = static_cast<double>(marginals.gamma()[static_cast<std::size_t>(i)]);
    attraction(i) = static_cast<double>(marginals.eta()[static_cast<std::size_t>(i)]);
  }
  GravityFit gravity =
      gravity_fit(production, attraction, cost, config.gravity_params);

  Matrix truth_dense = truth.to_dense();
  FlowComparison estimate_score =
      compare_flows(estimate.flow.to_dense(), truth_dense);
  FlowComparison gravity_score = compare_flows(gravity.flow, truth_dense);

  return SyntheticResult{std::move(zones),        std::move(cost),
                         std::move(truth),        truth_objective,
                         truth_is_optimal,        std::move(marginals),
                         std::move(estimate),     std::move(gravity),
                         std::move(estimate_score), std::move(gravity_score)};
}

}  // namespace odflow
