#include "odflow/zone_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace odflow {

namespace {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void validate_polygon(const ZonePolygon& zone) {
  if (zone.zone_id.empty()) {
    throw std::invalid_argument("zone id must be nonempty");
  }
  if (zone.corners.size() < 3) {
    throw std::invalid_argument("zone '" + zone.zone_id +
                                "' needs at least 3 corners");
  }
  for (const Point& p : zone.corners) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("zone '" + zone.zone_id +
                                  "' has a non-finite corner");
    }
  }
}

bool zones_share_corner(const ZonePolygon& a, const ZonePolygon& b,
                        double snap_tolerance) {
  for (const Point& pa : a.corners) {
    for (const Point& pb : b.corners) {
      if (snap_tolerance == 0.0 ? pa == pb
                                : distance(pa, pb) <= snap_tolerance) {
        return true;
      }
    }
  }
  return false;
}

Point corner_mean(const ZonePolygon& zone) {
  double sx = 0.0;
  double sy = 0.0;
  for (const Point& p : zone.corners) {
    sx += p.x;
    sy += p.y;
  }
  const double k = static_cast<double>(zone.corners.size());
  return Point{sx / k, sy / k};
}

double nearest_corner_distance(const ZonePolygon& a, const ZonePolygon& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& pa : a.corners) {
    for (const Point& pb : b.corners) {
      double d = distance(pa, pb);
      if (d < best) best = d;  // strict: first (lowest-index) pair wins ties
    }
  }
  return best;
}

}  // namespace

ZoneSet::ZoneSet(std::vector<ZonePolygon> zones) : zones_(std::move(zones)) {
  if (zones_.empty()) {
    throw std::invalid_argument("zone set must contain at least one zone");
  }
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    validate_polygon(zones_[i]);
    auto [it, inserted] = index_.emplace(zones_[i].zone_id, i);
    if (!inserted) {
      throw std::invalid_argument("duplicate zone id '" + zones_[i].zone_id + "'");
    }
  }
}

std::optional<std::size_t> ZoneSet::index_of(std::string_view zone_id) const {
  auto it = index_.find(std::string(zone_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ZoneSet::ids() const {
  std::vector<std::string> result;
  result.reserve(zones_.size());
  for (const ZonePolygon& z : zones_) result.push_back(z.zone_id);
  return result;
}

CostMatrix cost_adjacency(const ZoneSet& zones,
                          const AdjacencyOptions& options) {
  if (options.snap_tolerance < 0.0) {
    throw std::invalid_argument("snap tolerance must be >= 0");
  }
  if (!(options.adjacent_cost < options.distant_cost)) {
    throw std::invalid_argument("adjacent cost must be below distant cost");
  }
  const auto n = static_cast<Eigen::Index>(zones.size());
  Matrix c = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      bool adjacent = zones_share_corner(zones.zone(static_cast<std::size_t>(i)),
                                         zones.zone(static_cast<std::size_t>(j)),
                                         options.snap_tolerance);
      double value = adjacent ? options.adjacent_cost : options.distant_cost;
      c(i, j) = value;
      c(j, i) = value;
    }
  }
  return CostMatrix(std::move(c));
}

CostMatrix cost_centroid(const ZoneSet& zones) {
  const auto n = static_cast<Eigen::Index>(zones.size());
  std::vector<Point> centroids;
  centroids.reserve(zones.size());
  for (const ZonePolygon& z : zones.zones()) centroids.push_back(corner_mean(z));

  Matrix c = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = distance(centroids[static_cast<std::size_t>(i)],
                          centroids[static_cast<std::size_t>(j)]);
      c(i, j) = d;
      c(j, i) = d;
    }
  }
  return CostMatrix(std::move(c));
}

CostMatrix cost_nearest_corner(const ZoneSet& zones) {
  const auto n = static_cast<Eigen::Index>(zones.size());
  Matrix c = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = nearest_corner_distance(zones.zone(static_cast<std::size_t>(i)),
                                         zones.zone(static_cast<std::size_t>(j)));
      c(i, j) = d;
      c(j, i) = d;
    }
  }
  return CostMatrix(std::move(c));
}

CostMatrix perturb_costs(const CostMatrix& cost, double epsilon,
                         std::uint64_t seed) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("noise amplitude must be > 0");
  }
  std::mt19937_64 rng(seed);
  Matrix values = cost.values();
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      // 53-bit draw mapped onto [0, 1); avoids distribution objects so the
      // stream is identical on every platform.
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      values(i, j) += u * epsilon;
    }
  }
  return CostMatrix(std::move(values));
}

ZoneSet parse_zones_lines(std::istream& in) {
  std::vector<ZonePolygon> zones;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string field;
    ZonePolygon zone;
    bool first = true;
    while (std::getline(fields, field, ';')) {
      if (first) {
        zone.zone_id = field;
        first = false;
        continue;
      }
      double x = 0.0;
      double y = 0.0;
      char comma = 0;
      std::stringstream coords(field);
      if (!(coords >> x >> comma >> y) || comma != ',') {
        throw ParseError("bad corner '" + field + "'", line_number);
      }
      zone.corners.push_back({x, y});
    }
    if (zone.zone_id.empty() || zone.corners.size() < 3) {
      throw ParseError("zone line needs an id and at least 3 corners",
                       line_number);
    }
    zones.push_back(std::move(zone));
  }
  return ZoneSet(std::move(zones));
}

ZoneSet parse_zones_geojson(std::istream& in) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1);
  }
  if (root.value("type", "") != "FeatureCollection" ||
      !root.contains("features")) {
    throw std::invalid_argument("expected a GeoJSON FeatureCollection");
  }

  std::vector<ZonePolygon> zones;
  for (const auto& feature : root.at("features")) {
    ZonePolygon zone;
    if (feature.contains("properties") && feature["properties"].contains("id")) {
      const auto& id = feature["properties"]["id"];
      zone.zone_id = id.is_string() ? id.get<std::string>() : id.dump();
    } else if (feature.contains("id")) {
      const auto& id = feature["id"];
      zone.zone_id = id.is_string() ? id.get<std::string>() : id.dump();
    } else {
      throw std::invalid_argument("GeoJSON feature without an id property");
    }

    const auto& geometry = feature.at("geometry");
    if (geometry.value("type", "") != "Polygon") {
      throw std::invalid_argument("zone '" + zone.zone_id +
                                  "': only Polygon geometries are supported");
    }
    const auto& rings = geometry.at("coordinates");
    if (rings.empty()) {
      throw std::invalid_argument("zone '" + zone.zone_id + "': empty polygon");
    }
    for (const auto& coord : rings.at(0)) {
      zone.corners.push_back({coord.at(0).get<double>(), coord.at(1).get<double>()});
    }
    // GeoJSON rings repeat the first corner at the end.
    if (zone.corners.size() > 3 && zone.corners.front() == zone.corners.back()) {
      zone.corners.pop_back();
    }
    zones.push_back(std::move(zone));
  }
  return ZoneSet(std::move(zones));
}

}  // namespace odflow
