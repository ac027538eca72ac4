#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "odflow/zone_geometry.hpp"

using namespace odflow;

namespace {

ZonePolygon unit_square(std::string id, double x, double y) {
  return {std::move(id),
          {{x, y}, {x + 1.0, y}, {x + 1.0, y + 1.0}, {x, y + 1.0}}};
}

ZoneSet random_zone_set(std::mt19937_64& rng, std::size_t count) {
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  std::vector<ZonePolygon> zones;
  for (std::size_t i = 0; i < count; ++i) {
    ZonePolygon zone;
    zone.zone_id = "Z" + std::to_string(i);
    std::size_t corners = 3 + rng() % 5;
    for (std::size_t c = 0; c < corners; ++c) {
      zone.corners.push_back({coord(rng), coord(rng)});
    }
    zones.push_back(std::move(zone));
  }
  return ZoneSet(std::move(zones));
}

void check_symmetric_zero_diagonal(const CostMatrix& cost) {
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    CHECK(cost.at(i, i) == 0.0);
    for (Eigen::Index j = 0; j < cost.size(); ++j) {
      CHECK(cost.at(i, j) == cost.at(j, i));
      CHECK(cost.at(i, j) >= 0.0);
    }
  }
}

}  // namespace

TEST_CASE("zone set validation") {
  CHECK_THROWS_AS(ZoneSet({}), std::invalid_argument);
  CHECK_THROWS_AS(ZoneSet({{"A", {{0, 0}, {1, 0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(ZoneSet({unit_square("A", 0, 0), unit_square("A", 2, 0)}),
                  std::invalid_argument);
  ZoneSet zones({unit_square("A", 0, 0), unit_square("B", 2, 0)});
  CHECK(zones.index_of("B") == 1);
  CHECK_FALSE(zones.index_of("C").has_value());
  CHECK(zones.ids() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("cost_adjacency marks zones sharing a corner") {
  ZoneSet triangles({{"L", {{0, 0}, {-1, 1}, {-1, -1}}},
                     {"R", {{0, 0}, {1, 1}, {1, -1}}}});
  CostMatrix cost = cost_adjacency(triangles);
  CHECK(cost.at(0, 1) == 0.1);
  CHECK(cost.at(1, 0) == 0.1);
  CHECK(cost.at(0, 0) == 0.0);
}

TEST_CASE("cost_adjacency single zone and disjoint zones") {
  CHECK(cost_adjacency(ZoneSet({unit_square("A", 0, 0)})).at(0, 0) == 0.0);

  ZoneSet apart({unit_square("A", 0, 0), unit_square("B", 10, 10)});
  CostMatrix cost = cost_adjacency(apart);
  CHECK(cost.at(0, 1) == 1.0);
  CHECK(cost.at(1, 0) == 1.0);
}

TEST_CASE("cost_adjacency values stay on the three levels") {
  std::mt19937_64 rng(20240310);
  ZoneSet zones = random_zone_set(rng, 12);
  CostMatrix cost = cost_adjacency(zones);
  check_symmetric_zero_diagonal(cost);
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    for (Eigen::Index j = 0; j < cost.size(); ++j) {
      double v = cost.at(i, j);
      CHECK((v == 0.0 || v == 0.1 || v == 1.0));
    }
  }
}

TEST_CASE("cost_adjacency snap tolerance joins nearly equal corners") {
  ZoneSet zones({unit_square("A", 0, 0), unit_square("B", 1.0 + 1e-7, 0)});
  CHECK(cost_adjacency(zones).at(0, 1) == 1.0);  // exact match required
  AdjacencyOptions options;
  options.snap_tolerance = 1e-6;
  CHECK(cost_adjacency(zones, options).at(0, 1) == 0.1);
}

TEST_CASE("cost_centroid uses corner-mean centroids") {
  ZoneSet zones({unit_square("A", 0, 0), unit_square("B", 3, 0)});
  CostMatrix cost = cost_centroid(zones);
  CHECK(cost.at(0, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(cost.at(0, 0) == 0.0);
}

TEST_CASE("cost_centroid is translation invariant") {
  std::mt19937_64 rng(20240311);
  ZoneSet zones = random_zone_set(rng, 6);
  CostMatrix original = cost_centroid(zones);
  check_symmetric_zero_diagonal(original);

  std::vector<ZonePolygon> shifted(zones.zones().begin(), zones.zones().end());
  for (ZonePolygon& zone : shifted) {
    for (Point& p : zone.corners) {
      p.x += 13.25;
      p.y -= 7.5;
    }
  }
  CostMatrix moved = cost_centroid(ZoneSet(std::move(shifted)));
  for (Eigen::Index i = 0; i < original.size(); ++i) {
    for (Eigen::Index j = 0; j < original.size(); ++j) {
      CHECK(moved.at(i, j) == doctest::Approx(original.at(i, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("cost_nearest_corner distances") {
  ZoneSet apart({unit_square("A", 0, 0), unit_square("B", 3, 0)});
  CHECK(cost_nearest_corner(apart).at(0, 1) == 2.0);

  ZoneSet touching({{"L", {{0, 0}, {-1, 1}, {-1, -1}}},
                    {"R", {{0, 0}, {1, 1}, {1, -1}}}});
  CHECK(cost_nearest_corner(touching).at(0, 1) == 0.0);
}

TEST_CASE("cost_nearest_corner symmetry and corner-distance bound") {
  std::mt19937_64 rng(20240312);
  ZoneSet zones = random_zone_set(rng, 8);
  CostMatrix cost = cost_nearest_corner(zones);
  check_symmetric_zero_diagonal(cost);
  for (std::size_t i = 0; i < zones.size(); ++i) {
    for (std::size_t j = i + 1; j < zones.size(); ++j) {
      double max_pair = 0.0;
      bool shared = false;
      for (const Point& a : zones.zone(i).corners) {
        for (const Point& b : zones.zone(j).corners) {
          max_pair = std::max(max_pair, std::hypot(a.x - b.x, a.y - b.y));
          shared = shared || a == b;
        }
      }
      double v = cost.at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      CHECK(v <= max_pair);
      CHECK((v == 0.0) == shared);
    }
  }
}

TEST_CASE("perturb_costs adds bounded noise deterministically") {
  ZoneSet zones({unit_square("A", 0, 0), unit_square("B", 1, 0),
                 unit_square("C", 5, 5)});
  CostMatrix base = cost_adjacency(zones);
  const double epsilon = 1e-4;

  CostMatrix noisy = perturb_costs(base, epsilon, 42);
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    for (Eigen::Index j = 0; j < base.size(); ++j) {
      double delta = noisy.at(i, j) - base.at(i, j);
      CHECK(delta >= 0.0);
      CHECK(delta < epsilon);
    }
  }

  CostMatrix again = perturb_costs(base, epsilon, 42);
  CHECK(noisy.values() == again.values());

  int distinct = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (perturb_costs(base, epsilon, seed).values() != noisy.values()) ++distinct;
  }
  CHECK(distinct >= 99);
}

TEST_CASE("perturbation keeps the optimum within epsilon * k") {
  std::mt19937_64 rng(20240313);
  for (int it = 0; it < 30; ++it) {
    std::size_t n = 2 + rng() % 3;
    std::vector<Count> gamma(n);
    std::vector<Count> eta(n, 0);
    Count total = 0;
    for (auto& g : gamma) {
      g = static_cast<Count>(rng() % 6);
      total += g;
    }
    for (Count unit = 0; unit < total; ++unit) eta[rng() % n] += 1;
    if (total == 0) continue;
    Marginals m = check_feasible(gamma, eta);
    CostMatrix base = CostMatrix::two_level(static_cast<Eigen::Index>(n), 0.0, 1.0);
    const double epsilon = 1e-3;
    double clean = solve_lp(m, base).objective;
    double noisy = solve_lp(m, perturb_costs(base, epsilon, rng())).objective;
    CHECK(noisy >= clean);
    CHECK(noisy <= clean + epsilon * static_cast<double>(m.total()));
  }
}

TEST_CASE("parse_zones_lines reads the semicolon format") {
  std::stringstream in("A;0,0;1,0;1,1;0,1\nB;1,0;2,0;2,1;1,1\n");
  ZoneSet zones = parse_zones_lines(in);
  CHECK(zones.size() == 2);
  CHECK(zones.zone(0).corners.size() == 4);
  CHECK(zones.zone(1).corners[0] == Point{1.0, 0.0});

  std::stringstream bad("A;0,0;1,0\n");
  CHECK_THROWS_AS(parse_zones_lines(bad), ParseError);
  std::stringstream garbled("A;0,0;1;1,1\n");
  CHECK_THROWS_AS(parse_zones_lines(garbled), ParseError);
}

TEST_CASE("parse_zones_geojson reads polygons and drops the closing corner") {
  std::stringstream in(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature", "properties": {"id": "A"},
       "geometry": {"type": "Polygon",
                    "coordinates": [[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
      {"type": "Feature", "properties": {"id": "B"},
       "geometry": {"type": "Polygon",
                    "coordinates": [[[1,0],[2,0],[2,1],[1,1],[1,0]]]}}
    ]})");
  ZoneSet zones = parse_zones_geojson(in);
  CHECK(zones.size() == 2);
  CHECK(zones.zone(0).corners.size() == 4);
  CHECK(cost_adjacency(zones).at(0, 1) == 0.1);
}

TEST_CASE("parse_zones_geojson rejects unusable input") {
  std::stringstream no_id(R"({"type": "FeatureCollection", "features": [
    {"type": "Feature", "properties": {},
     "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[1,1]]]}}]})");
  CHECK_THROWS_AS(parse_zones_geojson(no_id), std::invalid_argument);

  std::stringstream line_geometry(R"({"type": "FeatureCollection", "features": [
    {"type": "Feature", "properties": {"id": "A"},
     "geometry": {"type": "LineString", "coordinates": [[0,0],[1,0]]}}]})");
  CHECK_THROWS_AS(parse_zones_geojson(line_geometry), std::invalid_argument);

  std::stringstream not_json("zone data");
  CHECK_THROWS_AS(parse_zones_geojson(not_json), ParseError);
}
