#include "odflow/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace odflow {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool parse_fixed_digits(std::string_view text, std::size_t pos,
                        std::size_t count, int& out) {
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

// Ceiling of t to a multiple of bucket, correct for negative t as well.
std::int64_t ceil_to_grid(std::int64_t t, std::int64_t bucket) {
  std::int64_t q = t / bucket;
  std::int64_t r = t % bucket;
  if (r > 0) ++q;
  return q * bucket;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601_utc(std::string_view text) {
  if (text.size() == 20 && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19) return std::nullopt;
  int year, month, day, hour, minute, second;
  if (!parse_fixed_digits(text, 0, 4, year) || text[4] != '-' ||
      !parse_fixed_digits(text, 5, 2, month) || text[7] != '-' ||
      !parse_fixed_digits(text, 8, 2, day) || text[10] != 'T' ||
      !parse_fixed_digits(text, 11, 2, hour) || text[13] != ':' ||
      !parse_fixed_digits(text, 14, 2, minute) || text[16] != ':' ||
      !parse_fixed_digits(text, 17, 2, second)) {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
      minute > 59 || second > 60) {
    return std::nullopt;
  }
  return days_from_civil(year, static_cast<unsigned>(month),
                         static_cast<unsigned>(day)) *
             86400 +
         hour * 3600 + minute * 60 + second;
}

std::string format_iso8601_utc(std::int64_t seconds) {
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t year;
  unsigned month, day;
  civil_from_days(days, year, month, day);
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(year), month, day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buffer;
}

ParsedPresence parse_presence(std::istream& in, const ZoneSet& zones) {
  ParsedPresence result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::size_t first_comma = line.find(',');
    std::size_t second_comma =
        first_comma == std::string::npos ? std::string::npos
                                         : line.find(',', first_comma + 1);
    if (second_comma == std::string::npos) {
      throw ParseError("expected `zone_id,timestamp,count`", line_number);
    }
    std::string zone_id = line.substr(0, first_comma);
    std::string_view stamp =
        std::string_view(line).substr(first_comma + 1, second_comma - first_comma - 1);
    std::string_view count_text = std::string_view(line).substr(second_comma + 1);

    auto timestamp = parse_iso8601_utc(stamp);
    if (!timestamp) {
      throw ParseError("bad timestamp '" + std::string(stamp) + "'", line_number);
    }
    Count count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(),
                                     count_text.data() + count_text.size(), count);
    if (ec != std::errc{} || ptr != count_text.data() + count_text.size()) {
      throw ParseError("bad count '" + std::string(count_text) + "'", line_number);
    }
    if (count < 0) {
      throw ParseError("negative count", line_number);
    }
    if (!zones.index_of(zone_id)) {
      result.rejects.push_back({line_number, zone_id, "unknown zone id"});
      continue;
    }
    result.records.push_back({std::move(zone_id), *timestamp, count});
  }
  return result;
}

SnapshotSeries aggregate(std::span<const PresenceRecord> records,
                         const ZoneSet& zones, std::int64_t bucket_seconds) {
  if (bucket_seconds <= 0) {
    throw std::invalid_argument("bucket duration must be > 0");
  }
  SnapshotSeries series;
  series.bucket_seconds = bucket_seconds;
  if (records.empty()) return series;

  std::map<std::int64_t, std::vector<Count>> buckets;
  for (const PresenceRecord& record : records) {
    auto zone = zones.index_of(record.zone_id);
    if (!zone) {
      throw std::invalid_argument("record for unknown zone '" + record.zone_id + "'");
    }
    std::int64_t end = ceil_to_grid(record.interval_end, bucket_seconds);
    auto [it, inserted] = buckets.try_emplace(end, zones.size(), Count{0});
    it->second[*zone] += record.event_count;
  }

  const std::int64_t first = buckets.begin()->first;
  const std::int64_t last = buckets.rbegin()->first;
  for (std::int64_t t = first; t <= last; t += bucket_seconds) {
    auto it = buckets.find(t);
    if (it == buckets.end()) {
      series.filled_gaps.push_back(t);
      series.snapshots.push_back({t, std::vector<Count>(zones.size(), 0)});
    } else {
      series.snapshots.push_back({t, std::move(it->second)});
    }
  }
  return series;
}

std::vector<Count> largest_remainder_round(std::span<const double> weights,
                                           Count target_total) {
  if (weights.empty()) {
    throw std::invalid_argument("cannot round an empty weight vector");
  }
  if (target_total < 0) {
    throw std::invalid_argument("target total must be >= 0");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weights must be finite and >= 0");
    }
    total += w;
  }
  if (total == 0.0) {
    if (target_total == 0) return std::vector<Count>(weights.size(), 0);
    throw std::invalid_argument("cannot distribute a positive total over zero weights");
  }

  const double scale = static_cast<double>(target_total) / total;
  std::vector<Count> rounded(weights.size());
  std::vector<double> fractional(weights.size());
  Count floored_total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double scaled = weights[i] * scale;
    double floored = std::floor(scaled);
    rounded[i] = static_cast<Count>(floored);
    fractional[i] = scaled - floored;
    floored_total += rounded[i];
  }

  Count shortfall = target_total - floored_total;
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fractional[a] != fractional[b]) return fractional[a] > fractional[b];
    return a < b;
  });
  for (Count i = 0; i < shortfall; ++i) {
    ++rounded[order[static_cast<std::size_t>(i)]];
  }
  return rounded;
}

Marginals normalize_pair(const PresenceSnapshot& from,
                         const PresenceSnapshot& to, Count target_total) {
  if (target_total < 1) {
    throw std::invalid_argument("target total must be >= 1");
  }
  if (from.counts.size() != to.counts.size()) {
    throw std::invalid_argument("snapshot dimensions differ");
  }
  auto scale = [target_total](const PresenceSnapshot& snapshot) {
    std::vector<double> weights(snapshot.counts.begin(), snapshot.counts.end());
    if (std::accumulate(weights.begin(), weights.end(), 0.0) == 0.0) {
      throw std::invalid_argument(
          "zero-total snapshot at " + format_iso8601_utc(snapshot.interval_end));
    }
    return largest_remainder_round(weights, target_total);
  };
  return check_feasible(scale(from), scale(to));
}

std::vector<std::pair<PresenceSnapshot, PresenceSnapshot>> pair_stream(
    const SnapshotSeries& series) {
  if (series.snapshots.size() < 2) {
    throw std::invalid_argument("need at least 2 snapshots to form pairs");
  }
  std::vector<std::pair<PresenceSnapshot, PresenceSnapshot>> pairs;
  pairs.reserve(series.snapshots.size() - 1);
  for (std::size_t i = 0; i + 1 < series.snapshots.size(); ++i) {
    pairs.emplace_back(series.snapshots[i], series.snapshots[i + 1]);
  }
  return pairs;
}

Matrix average_flows(std::span<const FlowMatrix> flows) {
  if (flows.empty()) {
    throw std::invalid_argument("cannot average an empty flow list");
  }
  const Count rows = flows[0].rows();
  const Count cols = flows[0].cols();
  Matrix mean = Matrix::Zero(rows, cols);
  for (const FlowMatrix& flow : flows) {
    if (flow.rows() != rows || flow.cols() != cols) {
      throw std::invalid_argument("flow dimensions differ");
    }
    for (const FlowEntry& e : flow.entries()) {
      mean(e.row, e.col) += static_cast<double>(e.value);
    }
  }
  mean /= static_cast<double>(flows.size());
  return mean;
}

void write_snapshot_csv(const SnapshotSeries& series, const ZoneSet& zones,
                        std::ostream& out) {
  out << "interval_end,zone_id,count\n";
  for (const PresenceSnapshot& snapshot : series.snapshots) {
    for (std::size_t z = 0; z < zones.size(); ++z) {
      out << format_iso8601_utc(snapshot.interval_end) << ','
          << zones.zone(z).zone_id << ',' << snapshot.counts[z] << '\n';
    }
  }
}

void write_marginals_csv(const Marginals& marginals, const ZoneSet& zones,
                         std::ostream& out) {
  out << "zone_id,gamma,eta\n";
  for (std::size_t z = 0; z < marginals.size(); ++z) {
    out << zones.zone(z).zone_id << ',' << marginals.gamma()[z] << ','
        << marginals.eta()[z] << '\n';
  }
}

}  // namespace odflow
