// Command-line front end: estimation pipeline, Markov extrapolation, the
// gravity baseline, the runtime-scaling benchmark, and synthetic scenarios.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odflow/bench.hpp"
#include "odflow/matrix_io.hpp"
#include "odflow/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace odflow;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNonConvergence = 3;

// Durations: plain seconds or a number suffixed with s/m/h.
std::int64_t parse_duration_seconds(const std::string& text) {
  if (text.empty()) throw CLI::ValidationError("empty duration");
  std::int64_t factor = 1;
  std::string digits = text;
  switch (text.back()) {
    case 's': factor = 1; digits.pop_back(); break;
    case 'm': factor = 60; digits.pop_back(); break;
    case 'h': factor = 3600; digits.pop_back(); break;
    default: break;
  }
  try {
    std::size_t used = 0;
    std::int64_t value = std::stoll(digits, &used);
    if (used != digits.size() || value <= 0) throw std::invalid_argument(text);
    return value * factor;
  } catch (const std::exception&) {
    throw CLI::ValidationError("bad duration '" + text + "' (use e.g. 900, 15m, 1h)");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> values;
  std::stringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    std::stringstream conv(field);
    T value;
    if (!(conv >> value)) {
      throw CLI::ValidationError("bad list element '" + field + "'");
    }
    values.push_back(value);
  }
  if (values.empty()) throw CLI::ValidationError("empty list");
  return values;
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "adjacency") return CostKind::adjacency;
  if (name == "centroid") return CostKind::centroid;
  if (name == "nearest") return CostKind::nearest_corner;
  throw CLI::ValidationError("unknown cost '" + name +
                             "' (adjacency, centroid, nearest)");
}

ZoneSet load_zones(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open zones file '" + path + "'");
  fs::path p(path);
  if (p.extension() == ".json" || p.extension() == ".geojson") {
    return parse_zones_geojson(in);
  }
  return parse_zones_lines(in);
}

CostMatrix load_cost(const ZoneSet& zones, const std::string& cost_kind,
                     const std::string& cost_file, double snap_tolerance) {
  if (!cost_file.empty()) {
    std::ifstream in(cost_file);
    if (!in) throw std::invalid_argument("cannot open cost file '" + cost_file + "'");
    LabeledMatrix labeled = read_matrix_csv(in);
    if (labeled.ids != zones.ids()) {
      throw std::invalid_argument("cost file zone ids do not match the zone set");
    }
    return CostMatrix(std::move(labeled.values));
  }
  return build_cost(zones, parse_cost_kind(cost_kind), snap_tolerance);
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  fs::path path = dir / name;
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path.string() + "'");
  std::cout << "wrote " << path.string() << "\n";
  return out;
}

struct EstimateArgs {
  std::string presence_file;
  std::string zones_file;
  std::string bucket = "15m";
  Count total = 1'000'000;
  std::string cost_kind = "adjacency";
  std::string cost_file;
  double snap = 0.0;
  double noise = 1e-4;
  int randomizations = 4;
  std::uint64_t seed = 0;
  std::string steps;
  std::string hist;
  std::string out_dir = ".";
};

void add_estimate_flags(CLI::App* cmd, EstimateArgs& args) {
  cmd->add_option("presence", args.presence_file, "Presence CSV (zone_id,iso8601,count)")
      ->required();
  cmd->add_option("zones", args.zones_file,
                  "Zone polygons (.txt line format or .geojson)")
      ->required();
  cmd->add_option("--bucket", args.bucket, "Aggregation bucket (e.g. 15m)");
  cmd->add_option("--total", args.total, "Total user count N after normalization");
  cmd->add_option("--cost", args.cost_kind, "Cost matrix: adjacency|centroid|nearest");
  cmd->add_option("--cost-file", args.cost_file, "Explicit cost matrix CSV (overrides --cost)");
  cmd->add_option("--snap", args.snap, "Corner snap tolerance for adjacency");
  cmd->add_option("--seed", args.seed, "Random seed");
  cmd->add_option("--out", args.out_dir, "Output directory");
}

int cmd_estimate(const EstimateArgs& args) {
  ZoneSet zones = load_zones(args.zones_file);
  CostMatrix cost = load_cost(zones, args.cost_kind, args.cost_file, args.snap);

  EstimateOptions options;
  options.bucket_seconds = parse_duration_seconds(args.bucket);
  options.target_total = args.total;
  options.noise_epsilon = args.noise;
  options.randomizations = args.randomizations;
  options.seed = args.seed;
  if (!args.steps.empty()) options.step_counts = parse_list<Count>(args.steps);
  if (!args.hist.empty()) options.histogram_weights = parse_list<double>(args.hist);

  std::ifstream presence(args.presence_file);
  if (!presence) {
    throw std::invalid_argument("cannot open presence file '" + args.presence_file + "'");
  }
  EstimateResult result = run_estimate(presence, zones, cost, options);

  for (const RejectedLine& reject : result.rejects) {
    std::cerr << "rejected line " << reject.line << ": " << reject.reason
              << " '" << reject.zone_id << "'\n";
  }
  for (const PairEstimate& pair : result.pairs) {
    std::cout << format_iso8601_utc(pair.from_time) << " -> "
              << format_iso8601_utc(pair.to_time)
              << " mean objective " << format_double(pair.mean_objective) << "\n";
  }

  const fs::path dir(args.out_dir);
  const std::vector<std::string> ids = zones.ids();
  {
    auto out = open_output(dir, "snapshots.csv");
    write_snapshot_csv(result.series, zones, out);
  }
  {
    auto out = open_output(dir, "marginals.csv");
    out << "from,to,zone_id,gamma,eta\n";
    for (const PairEstimate& pair : result.pairs) {
      for (std::size_t z = 0; z < zones.size(); ++z) {
        out << format_iso8601_utc(pair.from_time) << ','
            << format_iso8601_utc(pair.to_time) << ',' << zones.zone(z).zone_id
            << ',' << pair.marginals.gamma()[z] << ',' << pair.marginals.eta()[z]
            << '\n';
      }
    }
  }
  {
    auto out = open_output(dir, "flow_avg.csv");
    write_matrix_csv(result.averaged_flow, ids, out);
  }
  {
    auto out = open_output(dir, "transition_1step.csv");
    write_matrix_csv(result.one_step.values(), ids, out);
  }
  for (const auto& [step, matrix] : result.multi_step) {
    auto out = open_output(dir, "transition_" + std::to_string(step) + "step.csv");
    write_matrix_csv(matrix.values(), ids, out);
  }
  if (result.mixed) {
    auto out = open_output(dir, "transition_mixed.csv");
    write_matrix_csv(result.mixed->values(), ids, out);
  }
  return kExitOk;
}

struct ExtrapolateArgs {
  std::vector<std::string> matrix_files;
  std::string steps = "2";
  bool stationary = false;
  double tol = 1e-10;
  int max_iter = 10000;
  std::string out_dir = ".";
};

int cmd_extrapolate(const ExtrapolateArgs& args) {
  std::vector<StochasticMatrix> chain;
  std::vector<std::string> ids;
  for (const std::string& file : args.matrix_files) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open matrix file '" + file + "'");
    LabeledMatrix labeled = read_matrix_csv(in);
    if (ids.empty()) {
      ids = labeled.ids;
    } else if (ids != labeled.ids) {
      throw std::invalid_argument("matrix zone ids differ between files");
    }
    chain.emplace_back(std::move(labeled.values));
  }

  const fs::path dir(args.out_dir);
  for (Count step : parse_list<Count>(args.steps)) {
    StochasticMatrix extrapolated = chained_product(chain, step);
    auto out = open_output(dir, "extrapolated_" + std::to_string(step) + "step.csv");
    write_matrix_csv(extrapolated.values(), ids, out);
  }

  if (args.stationary) {
    StationaryResult stat =
        stationary_distribution(chained_product(chain, static_cast<Count>(chain.size())),
                                args.tol, args.max_iter);
    if (!stat.converged) {
      std::cerr << "stationary distribution did not converge after "
                << stat.iterations << " iterations (residual "
                << format_double(stat.residual) << ")\n";
      return kExitNonConvergence;
    }
    auto out = open_output(dir, "stationary.csv");
    out << "zone_id,probability\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out << ids[i] << ',' << format_double(stat.distribution(static_cast<Eigen::Index>(i)))
          << '\n';
    }
  }
  return kExitOk;
}

struct GravityArgs {
  EstimateArgs common;
  double alpha = 1.0;
  double floor = 0.1;
  double tol = 1e-9;
  int max_iter = 1000;
  bool compare = false;
};

int cmd_gravity(const GravityArgs& args) {
  ZoneSet zones = load_zones(args.common.zones_file);
  CostMatrix cost =
      load_cost(zones, args.common.cost_kind, args.common.cost_file, args.common.snap);

  std::ifstream presence(args.common.presence_file);
  if (!presence) {
    throw std::invalid_argument("cannot open presence file '" +
                                args.common.presence_file + "'");
  }
  ParsedPresence parsed = parse_presence(presence, zones);
  SnapshotSeries series = aggregate(
      parsed.records, zones, parse_duration_seconds(args.common.bucket));
  auto pairs = pair_stream(series);

  GravityParams params;
  params.alpha = args.alpha;
  params.cost_floor = args.floor;
  params.tolerance = args.tol;
  params.max_iterations = args.max_iter;

  const auto n = static_cast<Eigen::Index>(zones.size());
  Matrix gravity_sum = Matrix::Zero(n, n);
  std::vector<FlowMatrix> lp_flows;
  for (const auto& [from, to] : pairs) {
    Marginals marginals = normalize_pair(from, to, args.common.total);
    Vector production(n);
    Vector attraction(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      production(i) = static_cast<double>(marginals.gamma()[static_cast<std::size_t>(i)]);
      attraction(i) = static_cast<double>(marginals.eta()[static_cast<std::size_t>(i)]);
    }
    GravityFit fit = gravity_fit(production, attraction, cost, params);
    if (!fit.converged) {
      std::cerr << "gravity fit did not converge after " << fit.iterations
                << " iterations (residual " << format_double(fit.residual) << ")\n";
      return kExitNonConvergence;
    }
    gravity_sum += fit.flow;
    if (args.compare) lp_flows.push_back(solve_lp(marginals, cost).flow);
  }
  Matrix gravity_avg = gravity_sum / static_cast<double>(pairs.size());

  const fs::path dir(args.common.out_dir);
  const std::vector<std::string> ids = zones.ids();
  {
    auto out = open_output(dir, "gravity_avg.csv");
    write_matrix_csv(gravity_avg, ids, out);
  }
  if (args.compare) {
    Matrix lp_avg = average_flows(lp_flows);
    FlowComparison report = compare_flows(gravity_avg, lp_avg);
    auto out = open_output(dir, "gravity_vs_lp.csv");
    out << "metric,value\n";
    out << "l1_distance," << format_double(report.l1_distance) << '\n';
    out << "cosine_similarity," << format_double(report.cosine_similarity) << '\n';
    out << "cosine_defined," << (report.cosine_defined ? 1 : 0) << '\n';
    std::cout << "gravity vs LP: L1 " << format_double(report.l1_distance)
              << ", cosine " << format_double(report.cosine_similarity) << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  std::string sizes;
  int trials = 5;
  std::uint64_t seed = 0;
  Count total = 1'000'000;
  std::string solvers = "closed_form";
  Count cap = 4096;
  bool parallel = false;
  std::string out_dir = ".";
};

int cmd_bench(const BenchArgs& args) {
  BenchConfig config;
  config.trials = args.trials;
  config.seed = args.seed;
  config.total_mass = args.total;
  config.min_cost_flow_cap = args.cap;
  config.parallel_trials = args.parallel;
  if (args.parallel) {
    std::cerr << "warning: parallel trials share the machine; timings will be noisy\n";
  }

  config.run_closed_form = false;
  config.run_min_cost_flow = false;
  for (const std::string& solver : parse_list<std::string>(args.solvers)) {
    if (solver == "closed_form") {
      config.run_closed_form = true;
    } else if (solver == "min_cost_flow") {
      config.run_min_cost_flow = true;
    } else {
      throw CLI::ValidationError("unknown solver '" + solver + "'");
    }
  }

  if (!args.sizes.empty()) {
    config.sizes = parse_list<Count>(args.sizes);
  } else if (config.run_min_cost_flow) {
    config.sizes = {32, 64, 128, 256, 512, 1024};
  } else {
    for (Count n = 1 << 10; n <= 1 << 20; n <<= 1) config.sizes.push_back(n);
  }

  BenchTable table = run_bench(config);

  std::cout << "solver           n        mean[s]      std[s]       min[s]\n";
  for (const BenchRow& row : table.rows) {
    std::printf("%-14s %8lld %12.3e %12.3e %12.3e\n", row.solver.c_str(),
                static_cast<long long>(row.size), row.mean_seconds,
                row.stddev_seconds, row.min_seconds);
  }
  if (config.run_closed_form && config.sizes.size() > 1) {
    std::cout << "closed_form log-log slope: "
              << format_double(fit_loglog_slope(table, "closed_form")) << "\n";
  }
  if (config.run_min_cost_flow && config.sizes.size() > 1) {
    std::cout << "min_cost_flow log-log slope: "
              << format_double(fit_loglog_slope(table, "min_cost_flow")) << "\n";
  }

  const fs::path dir(args.out_dir);
  {
    auto out = open_output(dir, "bench.csv");
    write_bench_csv(table, out);
  }
  {
    auto out = open_output(dir, "bench.svg");
    write_bench_svg(table, out);
  }
  return kExitOk;
}

struct SynthArgs {
  std::size_t zones = 16;
  Count total = 1'000'000;
  std::uint64_t seed = 0;
  std::string truth = "optimal";
  std::string cost_kind = "adjacency";
  std::string out_dir = ".";
};

int cmd_synth(const SynthArgs& args) {
  SyntheticConfig config;
  config.zone_count = args.zones;
  config.total = args.total;
  config.seed = args.seed;
  config.cost_kind = parse_cost_kind(args.cost_kind);
  if (args.truth == "diagonal") {
    config.truth_kind = SyntheticConfig::TruthKind::diagonal;
  } else if (args.truth == "optimal") {
    config.truth_kind = SyntheticConfig::TruthKind::optimal;
  } else if (args.truth == "random") {
    config.truth_kind = SyntheticConfig::TruthKind::random_feasible;
  } else {
    throw CLI::ValidationError("unknown truth kind '" + args.truth +
                               "' (diagonal, optimal, random)");
  }

  SyntheticResult result = run_synthetic(config);

  std::cout << "ground truth objective:  " << format_double(result.truth_objective)
            << (result.truth_is_optimal ? " (optimal by construction)" : "") << "\n";
  std::cout << "estimated objective:     " << format_double(result.estimate.objective) << "\n";
  std::cout << "estimate vs truth:  L1 " << format_double(result.estimate_score.l1_distance)
            << ", cosine " << format_double(result.estimate_score.cosine_similarity) << "\n";
  std::cout << "gravity vs truth:   L1 " << format_double(result.gravity_score.l1_distance)
            << ", cosine " << format_double(result.gravity_score.cosine_similarity) << "\n";
  if (!result.gravity.converged) {
    std::cerr << "gravity fit did not converge\n";
    return kExitNonConvergence;
  }

  const fs::path dir(args.out_dir);
  const std::vector<std::string> ids = result.zones.ids();
  {
    auto out = open_output(dir, "ground_truth.csv");
    write_matrix_csv(result.ground_truth.to_dense(), ids, out);
  }
  {
    auto out = open_output(dir, "estimate_flow.csv");
    write_matrix_csv(result.estimate.flow.to_dense(), ids, out);
  }
  {
    auto out = open_output(dir, "gravity_flow.csv");
    write_matrix_csv(result.gravity.flow, ids, out);
  }
  {
    auto out = open_output(dir, "scores.csv");
    out << "estimator,l1_distance,cosine_similarity,objective\n";
    out << "lp," << format_double(result.estimate_score.l1_distance) << ','
        << format_double(result.estimate_score.cosine_similarity) << ','
        << format_double(result.estimate.objective) << '\n';
    out << "gravity," << format_double(result.gravity_score.l1_distance) << ','
        << format_double(result.gravity_score.cosine_similarity) << ",\n";
    out << "ground_truth,0,1," << format_double(result.truth_objective) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Origin-destination flow estimation from aggregated presence counts"};
  app.require_subcommand(1);

  EstimateArgs estimate_args;
  CLI::App* estimate = app.add_subcommand("estimate", "Run the estimation pipeline");
  add_estimate_flags(estimate, estimate_args);
  estimate->add_option("--noise", estimate_args.noise, "Uniform noise amplitude on costs");
  estimate->add_option("--randomizations", estimate_args.randomizations,
                       "Objective randomizations per pair");
  estimate->add_option("--steps", estimate_args.steps, "Comma list of i-step matrices to emit");
  estimate->add_option("--hist", estimate_args.hist,
                       "Comma list of duration-histogram weights");

  ExtrapolateArgs extrapolate_args;
  CLI::App* extrapolate =
      app.add_subcommand("extrapolate", "Power/chain saved transition matrices");
  extrapolate->add_option("matrices", extrapolate_args.matrix_files,
                          "Transition matrix CSVs, cycled in order")
      ->required();
  extrapolate->add_option("--steps", extrapolate_args.steps, "Comma list of step counts");
  extrapolate->add_flag("--stationary", extrapolate_args.stationary,
                        "Also compute the stationary distribution");
  extrapolate->add_option("--tol", extrapolate_args.tol, "Stationary tolerance");
  extrapolate->add_option("--max-iter", extrapolate_args.max_iter, "Stationary iteration cap");
  extrapolate->add_option("--out", extrapolate_args.out_dir, "Output directory");

  GravityArgs gravity_args;
  CLI::App* gravity = app.add_subcommand("gravity", "Fit the gravity baseline");
  add_estimate_flags(gravity, gravity_args.common);
  gravity->add_option("--alpha", gravity_args.alpha, "Distance-decay exponent");
  gravity->add_option("--floor", gravity_args.floor, "Minimum effective cost");
  gravity->add_option("--tol", gravity_args.tol, "Marginal-match tolerance");
  gravity->add_option("--max-iter", gravity_args.max_iter, "Fitting iteration cap");
  gravity->add_flag("--compare", gravity_args.compare, "Also solve the LP and compare");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Runtime-scaling benchmark");
  bench->add_option("--sizes", bench_args.sizes, "Comma list of dimensions");
  bench->add_option("--trials", bench_args.trials, "Timed trials per size (>= 3)");
  bench->add_option("--seed", bench_args.seed, "Random seed");
  bench->add_option("--total", bench_args.total, "Mass distributed over the simplex");
  bench->add_option("--solvers", bench_args.solvers,
                    "closed_form, min_cost_flow, or both comma-separated");
  bench->add_option("--cap", bench_args.cap, "Dimension cap for the general solver");
  bench->add_flag("--parallel", bench_args.parallel, "Run trials concurrently (noisy)");
  bench->add_option("--out", bench_args.out_dir, "Output directory");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Synthetic ground-truth scenario");
  synth->add_option("--zones", synth_args.zones, "Number of grid zones");
  synth->add_option("--total", synth_args.total, "Total trips");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_option("--truth", synth_args.truth, "diagonal|optimal|random");
  synth->add_option("--cost", synth_args.cost_kind, "adjacency|centroid|nearest");
  synth->add_option("--out", synth_args.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (*estimate) return cmd_estimate(estimate_args);
    if (*extrapolate) return cmd_extrapolate(extrapolate_args);
    if (*gravity) return cmd_gravity(gravity_args);
    if (*bench) return cmd_bench(bench_args);
    if (*synth) return cmd_synth(synth_args);
  } catch (const InfeasibleMarginals& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
