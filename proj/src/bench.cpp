#include "odflow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <random>
#include <stdexcept>

#include "odflow/ingestion.hpp"
#include "odflow/matrix_io.hpp"

namespace odflow {

namespace {

using Clock = std::chrono::steady_clock;

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Count> simplex_point(std::size_t n, Count total_mass,
                                 std::mt19937_64& rng) {
  std::vector<double> weights(n);
  for (double& w : weights) {
    // Normalized exponentials are uniform on the simplex.
    w = -std::log(1.0 - uniform_unit(rng));
  }
  return largest_remainder_round(weights, total_mass);
}

struct TrialOutcome {
  double seconds_per_solve = 0.0;
  bool identity_ok = true;
};

// Times `op` in a repetition loop sized so the measurement lasts at least
// min_seconds, and returns the per-call time.
template <typename Op>
double measure(Op&& op, double min_seconds) {
  long reps = 1;
  for (;;) {
    auto start = Clock::now();
    for (long r = 0; r < reps; ++r) op();
    double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (elapsed >= min_seconds || reps >= (1L << 30)) {
      return elapsed / static_cast<double>(reps);
    }
    double target = min_seconds / std::max(elapsed, 1e-9);
    reps = std::max(reps * 2, static_cast<long>(static_cast<double>(reps) * target * 1.2));
  }
}

TrialOutcome run_closed_form_trial(Count n, Count total_mass,
                                   std::uint64_t seed, double min_measure) {
  Marginals marginals =
      sample_simplex_marginals(static_cast<std::size_t>(n), total_mass, seed);
  Count sink = 0;
  TrialOutcome outcome;
  outcome.seconds_per_solve = measure(
      [&] {
        Count z = trace_max_value(marginals);
        sink += marginals.total() - z;  // objective under the 0/1 cost
      },
      min_measure);

  Count l1 = 0;
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    l1 += std::abs(marginals.eta()[i] - marginals.gamma()[i]);
  }
  outcome.identity_ok =
      trace_max_value(marginals) == marginals.total() - l1 / 2 && sink >= 0;
  return outcome;
}

TrialOutcome run_min_cost_flow_trial(Count n, Count total_mass,
                                     std::uint64_t seed, double min_measure) {
  Marginals marginals =
      sample_simplex_marginals(static_cast<std::size_t>(n), total_mass, seed);
  std::mt19937_64 rng(derive_seed(seed, 0x6d6366));
  Matrix values(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      values(i, j) = static_cast<double>(rng() % 10);
    }
  }
  CostMatrix cost(std::move(values));

  double objective_sink = 0.0;
  TrialOutcome outcome;
  outcome.seconds_per_solve = measure(
      [&] { objective_sink += min_cost_flow_solve(marginals, cost).objective; },
      min_measure);
  outcome.identity_ok = objective_sink >= 0.0;
  return outcome;
}

BenchRow summarize(const std::string& solver, Count size,
                   const std::vector<double>& times) {
  BenchRow row;
  row.solver = solver;
  row.size = size;
  row.trials = static_cast<int>(times.size());
  double sum = 0.0;
  double min_time = times[0];
  for (double t : times) {
    sum += t;
    min_time = std::min(min_time, t);
  }
  row.mean_seconds = sum / static_cast<double>(times.size());
  double variance = 0.0;
  for (double t : times) {
    variance += (t - row.mean_seconds) * (t - row.mean_seconds);
  }
  row.stddev_seconds = times.size() > 1
                           ? std::sqrt(variance / static_cast<double>(times.size() - 1))
                           : 0.0;
  row.min_seconds = min_time;
  return row;
}

}  // namespace

Marginals sample_simplex_marginals(std::size_t n, Count total_mass,
                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (total_mass < 0) throw std::invalid_argument("total mass must be >= 0");
  std::mt19937_64 rng(seed);
  std::vector<Count> gamma = simplex_point(n, total_mass, rng);
  std::vector<Count> eta = simplex_point(n, total_mass, rng);
  return check_feasible(std::move(gamma), std::move(eta));
}

BenchTable run_bench(const BenchConfig& config) {
  if (config.sizes.empty()) throw std::invalid_argument("no benchmark sizes");
  for (std::size_t i = 0; i < config.sizes.size(); ++i) {
    if (config.sizes[i] < 1 ||
        (i > 0 && config.sizes[i] <= config.sizes[i - 1])) {
      throw std::invalid_argument("sizes must be positive and strictly increasing");
    }
  }
  if (config.trials < 3) {
    throw std::invalid_argument("need at least 3 trials for mean and deviation");
  }
  if (!config.run_closed_form && !config.run_min_cost_flow) {
    throw std::invalid_argument("no solver enabled");
  }
  if (config.run_min_cost_flow &&
      config.sizes.back() > config.min_cost_flow_cap) {
    throw std::invalid_argument(
        "general solver refused above n=" +
        std::to_string(config.min_cost_flow_cap) +
        " (dense state would be too large; raise the cap to override)");
  }

  struct SolverSpec {
    const char* name;
    TrialOutcome (*run)(Count, Count, std::uint64_t, double);
    std::uint64_t stream_tag;
  };
  std::vector<SolverSpec> solvers;
  if (config.run_closed_form) {
    solvers.push_back({"closed_form", run_closed_form_trial, 1});
  }
  if (config.run_min_cost_flow) {
    solvers.push_back({"min_cost_flow", run_min_cost_flow_trial, 2});
  }

  BenchTable table;
  for (const SolverSpec& solver : solvers) {
    for (std::size_t s = 0; s < config.sizes.size(); ++s) {
      const Count n = config.sizes[s];
      const int total_trials = config.trials + 1;  // extra warm-up
      auto trial_seed = [&](int t) {
        return derive_seed(config.seed, (solver.stream_tag << 32) ^
                                            (static_cast<std::uint64_t>(s) << 16) ^
                                            static_cast<std::uint64_t>(t));
      };

      std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(total_trials));
      if (config.parallel_trials) {
        std::vector<std::future<TrialOutcome>> futures;
        futures.reserve(static_cast<std::size_t>(total_trials));
        for (int t = 0; t < total_trials; ++t) {
          futures.push_back(std::async(std::launch::async, solver.run, n,
                                       config.total_mass, trial_seed(t),
                                       config.min_measure_seconds));
        }
        for (int t = 0; t < total_trials; ++t) {
          outcomes[static_cast<std::size_t>(t)] = futures[static_cast<std::size_t>(t)].get();
        }
      } else {
        for (int t = 0; t < total_trials; ++t) {
          outcomes[static_cast<std::size_t>(t)] =
              solver.run(n, config.total_mass, trial_seed(t),
                         config.min_measure_seconds);
        }
      }

      std::vector<double> times;
      times.reserve(static_cast<std::size_t>(config.trials));
      for (int t = 1; t < total_trials; ++t) {  // drop the warm-up
        const TrialOutcome& outcome = outcomes[static_cast<std::size_t>(t)];
        if (!outcome.identity_ok) {
          throw std::logic_error("closed-form identity check failed in benchmark");
        }
        times.push_back(outcome.seconds_per_solve);
      }
      table.rows.push_back(summarize(solver.name, n, times));
    }
  }
  return table;
}

double fit_loglog_slope(const BenchTable& table, const std::string& solver) {
  std::vector<std::pair<double, double>> points;
  for (const BenchRow& row : table.rows) {
    if (row.solver == solver) {
      points.emplace_back(std::log2(static_cast<double>(row.size)),
                          std::log2(row.min_seconds));
    }
  }
  if (points.size() < 2) {
    throw std::invalid_argument("need at least two sizes to fit a slope");
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (auto [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(points.size());
  mean_y /= static_cast<double>(points.size());
  double num = 0.0;
  double den = 0.0;
  for (auto [x, y] : points) {
    num += (x - mean_x) * (y - mean_y);
    den += (x - mean_x) * (x - mean_x);
  }
  return num / den;
}

void write_bench_csv(const BenchTable& table, std::ostream& out) {
  out << "solver,n,trials,mean_seconds,stddev_seconds,min_seconds\n";
  for (const BenchRow& row : table.rows) {
    out << row.solver << ',' << row.size << ',' << row.trials << ','
        << format_double(row.mean_seconds) << ','
        << format_double(row.stddev_seconds) << ','
        << format_double(row.min_seconds) << '\n';
  }
}

namespace {

std::string px(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

}  // namespace

void write_bench_svg(const BenchTable& table, std::ostream& out) {
  if (table.rows.empty()) throw std::invalid_argument("empty benchmark table");

  const double left = 80, right = 770, top = 30, bottom = 490;
  double min_n = table.rows[0].size, max_n = table.rows[0].size;
  double min_t = table.rows[0].mean_seconds, max_t = table.rows[0].mean_seconds;
  for (const BenchRow& row : table.rows) {
    min_n = std::min(min_n, static_cast<double>(row.size));
    max_n = std::max(max_n, static_cast<double>(row.size));
    min_t = std::min(min_t, row.mean_seconds);
    max_t = std::max(max_t, row.mean_seconds);
  }
  double x_lo = std::log10(min_n), x_hi = std::log10(max_n);
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  double y_lo = std::floor(std::log10(min_t));
  double y_hi = std::ceil(std::log10(max_t));
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  auto map_x = [&](double n) {
    return left + (std::log10(n) - x_lo) / (x_hi - x_lo) * (right - left);
  };
  auto map_y = [&](double t) {
    return bottom - (std::log10(t) - y_lo) / (y_hi - y_lo) * (bottom - top);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"560\" "
         "viewBox=\"0 0 800 560\">\n";
  out << "<rect width=\"800\" height=\"560\" fill=\"white\"/>\n";

  for (int d = static_cast<int>(y_lo); d <= static_cast<int>(y_hi); ++d) {
    double y = map_y(std::pow(10.0, d));
    out << "<line x1=\"" << px(left) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(right) << "\" y2=\"" << px(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << px(left - 8) << "\" y=\"" << px(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">1e"
        << d << "</text>\n";
  }

  std::vector<Count> sizes;
  for (const BenchRow& row : table.rows) sizes.push_back(row.size);
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (Count n : sizes) {
    double x = map_x(static_cast<double>(n));
    out << "<line x1=\"" << px(x) << "\" y1=\"" << px(bottom) << "\" x2=\""
        << px(x) << "\" y2=\"" << px(bottom + 5)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << px(x) << "\" y=\"" << px(bottom + 20)
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << n << "</text>\n";
  }

  out << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\""
      << px(left) << "\" y2=\"" << px(bottom)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << px(left) << "\" y1=\"" << px(bottom) << "\" x2=\""
      << px(right) << "\" y2=\"" << px(bottom)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << px((left + right) / 2) << "\" y=\"535\" "
         "text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">"
         "dimension n</text>\n";
  out << "<text x=\"20\" y=\"" << px((top + bottom) / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 20 "
      << px((top + bottom) / 2) << ")\">run-time [s]</text>\n";

  const char* colors[] = {"#1f77b4", "#d62728"};
  const char* names[] = {"closed_form", "min_cost_flow"};
  double legend_y = top + 12;
  for (int s = 0; s < 2; ++s) {
    std::string path;
    for (const BenchRow& row : table.rows) {
      if (row.solver != names[s]) continue;
      path += path.empty() ? "M" : " L";
      path += px(map_x(static_cast<double>(row.size)));
      path += ",";
      path += px(map_y(row.mean_seconds));
    }
    if (path.empty()) continue;
    out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colors[s]
        << "\" stroke-width=\"2\"/>\n";
    for (const BenchRow& row : table.rows) {
      if (row.solver != names[s]) continue;
      out << "<circle cx=\"" << px(map_x(static_cast<double>(row.size)))
          << "\" cy=\"" << px(map_y(row.mean_seconds)) << "\" r=\"3\" fill=\""
          << colors[s] << "\"/>\n";
    }
    out << "<line x1=\"" << px(left + 14) << "\" y1=\"" << px(legend_y)
        << "\" x2=\"" << px(left + 44) << "\" y2=\"" << px(legend_y)
        << "\" stroke=\"" << colors[s] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(left + 50) << "\" y=\"" << px(legend_y + 4)
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << names[s]
        << " (mean)</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
}

}  // namespace odflow
