#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "odflow/polytope.hpp"
#include "odflow/zone_geometry.hpp"

namespace odflow {

// One ingested tuple: zone, end of the reporting interval (UTC seconds),
// number of observed events.
struct PresenceRecord {
  std::string zone_id;
  std::int64_t interval_end = 0;
  Count event_count = 0;
};

// Event counts for every zone at one point in time, in ZoneSet order.
struct PresenceSnapshot {
  std::int64_t interval_end = 0;
  std::vector<Count> counts;
};

// Uniformly spaced snapshots. Timestamps missing from the input were filled
// with all-zero snapshots and are listed in filled_gaps.
struct SnapshotSeries {
  std::vector<PresenceSnapshot> snapshots;
  std::int64_t bucket_seconds = 0;
  std::vector<std::int64_t> filled_gaps;
};

struct RejectedLine {
  std::size_t line = 0;
  std::string zone_id;
  std::string reason;
};

struct ParsedPresence {
  std::vector<PresenceRecord> records;
  std::vector<RejectedLine> rejects;  // e.g. unknown zone ids
};

// Parses CSV lines `zone_id,iso8601_interval_end,count`. Records naming
// unknown zones are collected in the rejects report instead of being
// dropped. Malformed lines and negative counts raise ParseError.
ParsedPresence parse_presence(std::istream& in, const ZoneSet& zones);

// Sums counts per zone per bucket; the bucket boundary is the interval end
// rounded up to the bucket grid. Missing buckets inside the covered range
// become zero snapshots and are flagged.
SnapshotSeries aggregate(std::span<const PresenceRecord> records,
                         const ZoneSet& zones, std::int64_t bucket_seconds);

// Largest-remainder rounding: scales nonnegative weights so the integer
// result sums exactly to target_total. The shortfall after flooring goes to
// the largest fractional parts, ties to the lowest index.
std::vector<Count> largest_remainder_round(std::span<const double> weights,
                                           Count target_total);

// Scales both snapshots so each sums exactly to target_total and returns the
// resulting feasible marginals. Throws on zero-total snapshots.
Marginals normalize_pair(const PresenceSnapshot& from,
                         const PresenceSnapshot& to, Count target_total);

// Consecutive snapshot pairs (E_t, E_{t+1}); requires >= 2 snapshots.
std::vector<std::pair<PresenceSnapshot, PresenceSnapshot>> pair_stream(
    const SnapshotSeries& series);

// Elementwise arithmetic mean of integral flows, as a real matrix.
Matrix average_flows(std::span<const FlowMatrix> flows);

// Strict `YYYY-MM-DDTHH:MM:SSZ` (the trailing Z may be omitted).
std::optional<std::int64_t> parse_iso8601_utc(std::string_view text);
std::string format_iso8601_utc(std::int64_t seconds);

void write_snapshot_csv(const SnapshotSeries& series, const ZoneSet& zones,
                        std::ostream& out);
void write_marginals_csv(const Marginals& marginals, const ZoneSet& zones,
                         std::ostream& out);

}  // namespace odflow
