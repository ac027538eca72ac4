#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "odflow/polytope.hpp"

namespace odflow {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// A zone described by its polygon corners in a projected planar coordinate
// system. Coordinates must be consistent across all zones; geodesic
// distances are out of scope, callers pre-project.
struct ZonePolygon {
  std::string zone_id;
  std::vector<Point> corners;  // >= 3, finite
};

// Ordered zone list; the index order defines the row/column order of every
// matrix downstream.
class ZoneSet {
 public:
  explicit ZoneSet(std::vector<ZonePolygon> zones);

  std::size_t size() const { return zones_.size(); }
  const ZonePolygon& zone(std::size_t i) const { return zones_[i]; }
  std::span<const ZonePolygon> zones() const { return zones_; }
  std::optional<std::size_t> index_of(std::string_view zone_id) const;
  std::vector<std::string> ids() const;

 private:
  std::vector<ZonePolygon> zones_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AdjacencyOptions {
  // Corners within this distance count as shared; 0 means exact equality as
  // real shapefiles rarely guarantee bit-identical corner coordinates.
  double snap_tolerance = 0.0;
  double adjacent_cost = 0.1;
  double distant_cost = 1.0;
};

// Adjacency metric: 0 on the diagonal, adjacent_cost when two zones share a
// corner point, distant_cost otherwise. Symmetric.
CostMatrix cost_adjacency(const ZoneSet& zones,
                          const AdjacencyOptions& options = {});

// Euclidean distance between corner-mean centroids (arithmetic mean of the
// corner points, not the area centroid).
CostMatrix cost_centroid(const ZoneSet& zones);

// Euclidean distance between the mutually nearest corner pair of the two
// zones; ties resolved toward the lowest corner indices. Zero diagonal.
CostMatrix cost_nearest_corner(const ZoneSet& zones);

// Adds an independent uniform draw from [0, epsilon) to every entry.
// Deterministic per seed, bit-identical across repeated calls.
CostMatrix perturb_costs(const CostMatrix& cost, double epsilon,
                         std::uint64_t seed);

// Line format: `zone_id;x1,y1;x2,y2;...`, one zone per line.
ZoneSet parse_zones_lines(std::istream& in);

// GeoJSON FeatureCollection of Polygon features; each feature needs an "id"
// property. A closing corner equal to the first is dropped.
ZoneSet parse_zones_geojson(std::istream& in);

}  // namespace odflow
