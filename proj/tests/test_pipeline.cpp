#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "odflow/matrix_io.hpp"
#include "odflow/pipeline.hpp"

using namespace odflow;

namespace {

constexpr const char* kToyPresence =
    "A,2017-03-06T08:15:00Z,3\n"
    "B,2017-03-06T08:15:00Z,1\n"
    "A,2017-03-06T08:30:00Z,2\n"
    "B,2017-03-06T08:30:00Z,2\n";

ZoneSet toy_zones() {
  return ZoneSet({{"A", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}},
                  {"B", {{1, 0}, {2, 0}, {2, 1}, {1, 1}}}});
}

EstimateOptions toy_options() {
  EstimateOptions options;
  options.target_total = 4;
  options.noise_epsilon = 0.0;
  options.randomizations = 1;
  return options;
}

}  // namespace

TEST_CASE("run_estimate reproduces the two-zone example") {
  ZoneSet zones = toy_zones();
  CostMatrix cost = build_cost(zones, CostKind::adjacency);
  std::istringstream presence(kToyPresence);

  EstimateOptions options = toy_options();
  options.step_counts = {2};
  options.histogram_weights = {0.5, 0.5};
  EstimateResult result = run_estimate(presence, zones, cost, options);

  CHECK(result.rejects.empty());
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].mean_objective == doctest::Approx(0.1).epsilon(1e-12));

  Matrix expected_flow(2, 2);
  expected_flow << 2, 1, 0, 1;
  CHECK(result.averaged_flow == expected_flow);

  CHECK(result.one_step.values()(0, 0) == 2.0 / 3.0);
  CHECK(result.one_step.values()(0, 1) == 1.0 / 3.0);
  CHECK(result.one_step.values()(1, 1) == 1.0);

  REQUIRE(result.multi_step.size() == 1);
  CHECK(result.multi_step[0].first == 2);
  CHECK(result.multi_step[0].second.values() ==
        (result.one_step.values() * result.one_step.values()).eval());

  REQUIRE(result.mixed.has_value());
  Matrix expected_mix =
      0.5 * result.one_step.values() + 0.5 * result.multi_step[0].second.values();
  CHECK(result.mixed->values() == expected_mix);
}

TEST_CASE("run_estimate routes around the expensive direct link") {
  ZoneSet zones = make_grid_zones(3);
  Matrix c = Matrix::Constant(3, 3, 1.0);
  c.diagonal().setZero();
  c(0, 1) = 10.0;
  c(1, 0) = 10.0;

  std::istringstream presence(
      "Z0001,2017-03-06T08:15:00Z,3\n"
      "Z0002,2017-03-06T08:15:00Z,1\n"
      "Z0003,2017-03-06T08:15:00Z,1\n"
      "Z0001,2017-03-06T08:30:00Z,2\n"
      "Z0002,2017-03-06T08:30:00Z,2\n"
      "Z0003,2017-03-06T08:30:00Z,1\n");
  EstimateOptions options = toy_options();
  options.target_total = 5;
  EstimateResult result = run_estimate(presence, zones, CostMatrix(c), options);

  Matrix expected(3, 3);
  expected << 2, 0, 1,
              0, 1, 0,
              0, 1, 0;
  CHECK(result.averaged_flow == expected);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].mean_objective == 2.0);
}

TEST_CASE("run_estimate output is byte-deterministic") {
  ZoneSet zones = toy_zones();
  CostMatrix cost = build_cost(zones, CostKind::adjacency);
  EstimateOptions options;
  options.target_total = 1000;
  options.noise_epsilon = 1e-4;
  options.randomizations = 4;
  options.seed = 17;

  auto render = [&] {
    std::istringstream presence(kToyPresence);
    EstimateResult result = run_estimate(presence, zones, cost, options);
    std::ostringstream out;
    write_matrix_csv(result.averaged_flow, zones.ids(), out);
    write_matrix_csv(result.one_step.values(), zones.ids(), out);
    return out.str();
  };
  CHECK(render() == render());
}

TEST_CASE("run_estimate conserves the normalized total in every flow") {
  ZoneSet zones = toy_zones();
  CostMatrix cost = build_cost(zones, CostKind::centroid);
  EstimateOptions options;
  options.target_total = 1'000'000;
  options.noise_epsilon = 1e-4;
  options.randomizations = 3;
  std::istringstream presence(
      "A,2017-03-06T08:15:00Z,31\n"
      "B,2017-03-06T08:15:00Z,17\n"
      "A,2017-03-06T08:30:00Z,22\n"
      "B,2017-03-06T08:30:00Z,29\n"
      "A,2017-03-06T08:45:00Z,25\n"
      "B,2017-03-06T08:45:00Z,20\n");
  EstimateResult result = run_estimate(presence, zones, cost, options);
  CHECK(result.pairs.size() == 2);
  CHECK(result.averaged_flow.sum() == doctest::Approx(1e6).epsilon(1e-12));
}

TEST_CASE("run_estimate reports unknown zones as rejects") {
  ZoneSet zones = toy_zones();
  CostMatrix cost = build_cost(zones, CostKind::adjacency);
  std::istringstream presence(
      "A,2017-03-06T08:15:00Z,3\n"
      "B,2017-03-06T08:15:00Z,1\n"
      "GHOST,2017-03-06T08:15:00Z,9\n"
      "A,2017-03-06T08:30:00Z,2\n"
      "B,2017-03-06T08:30:00Z,2\n");
  EstimateResult result = run_estimate(presence, zones, cost, toy_options());
  REQUIRE(result.rejects.size() == 1);
  CHECK(result.rejects[0].zone_id == "GHOST");
  Matrix expected(2, 2);
  expected << 2, 1, 0, 1;
  CHECK(result.averaged_flow == expected);
}

TEST_CASE("make_grid_zones builds adjacent unit squares") {
  ZoneSet grid = make_grid_zones(9);
  CHECK(grid.size() == 9);
  CHECK(grid.zone(0).zone_id == "Z0001");
  CostMatrix adjacency = cost_adjacency(grid);
  CHECK(adjacency.at(0, 1) == 0.1);  // side neighbors share an edge
  CHECK(adjacency.at(0, 4) == 0.1);  // diagonal neighbors share one corner
  CHECK(adjacency.at(0, 2) == 1.0);  // two cells apart
  CHECK(adjacency.at(0, 8) == 1.0);
}

TEST_CASE("run_synthetic diagonal truth is recovered exactly") {
  SyntheticConfig config;
  config.zone_count = 9;
  config.total = 100000;
  config.seed = 5;
  config.truth_kind = SyntheticConfig::TruthKind::diagonal;
  SyntheticResult result = run_synthetic(config);

  CHECK(result.truth_is_optimal);
  CHECK(result.estimate.flow == result.ground_truth);
  CHECK(result.estimate_score.l1_distance == 0.0);
  CHECK(result.estimate.objective == result.truth_objective);
  CHECK(result.estimate.flow.total() == 100000);
}

TEST_CASE("run_synthetic optimal truth matches the estimated objective") {
  SyntheticConfig config;
  config.zone_count = 12;
  config.total = 250000;
  config.seed = 11;
  config.truth_kind = SyntheticConfig::TruthKind::optimal;
  SyntheticResult result = run_synthetic(config);

  CHECK(result.truth_is_optimal);
  CHECK(result.estimate.objective == result.truth_objective);
  CHECK(result.estimate.flow.total() == 250000);
  CHECK(result.gravity.converged);
  CHECK(result.gravity_score.l1_distance >= 0.0);
}

TEST_CASE("run_synthetic random truth yields a score report without exactness") {
  SyntheticConfig config;
  config.zone_count = 8;
  config.total = 50000;
  config.seed = 23;
  config.truth_kind = SyntheticConfig::TruthKind::random_feasible;
  SyntheticResult result = run_synthetic(config);

  CHECK_FALSE(result.truth_is_optimal);
  CHECK(result.estimate.objective <= result.truth_objective);
  CHECK(result.ground_truth.total() == 50000);
  CHECK(result.estimate.flow.total() == 50000);
  CHECK(result.estimate_score.cosine_defined);
}

TEST_CASE("build_cost selects the requested construction") {
  ZoneSet zones = make_grid_zones(4);
  CHECK(build_cost(zones, CostKind::adjacency).at(0, 1) == 0.1);
  CHECK(build_cost(zones, CostKind::centroid).at(0, 1) == 1.0);
  CHECK(build_cost(zones, CostKind::nearest_corner).at(0, 1) == 0.0);
}
