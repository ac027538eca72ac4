#include "odflow/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace odflow {

Marginals check_feasible(std::vector<Count> gamma, std::vector<Count> eta) {
  if (gamma.empty() || eta.empty()) {
    throw std::invalid_argument("marginals must have length >= 1");
  }
  if (gamma.size() != eta.size()) {
    throw std::invalid_argument(
        "marginal length mismatch: " + std::to_string(gamma.size()) + " vs " +
        std::to_string(eta.size()));
  }
  Count gamma_total = 0;
  Count eta_total = 0;
  for (Count g : gamma) {
    if (g < 0) throw std::invalid_argument("negative entry in gamma");
    gamma_total += g;
  }
  for (Count e : eta) {
    if (e < 0) throw std::invalid_argument("negative entry in eta");
    eta_total += e;
  }
  if (gamma_total != eta_total) {
    throw InfeasibleMarginals(
        "empty transportation polytope: sum(gamma)=" +
            std::to_string(gamma_total) +
            " != sum(eta)=" + std::to_string(eta_total),
        gamma_total, eta_total);
  }
  return Marginals(std::move(gamma), std::move(eta), gamma_total);
}

FlowMatrix::FlowMatrix(Count rows, Count cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("flow matrix dimensions must be positive");
  }
}

FlowMatrix FlowMatrix::from_entries(Count rows, Count cols,
                                    std::vector<FlowEntry> entries) {
  FlowMatrix result(rows, cols);
  for (const FlowEntry& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw std::invalid_argument("flow entry index out of range");
    }
    if (e.value < 0) {
      throw std::invalid_argument("negative flow entry");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const FlowEntry& a, const FlowEntry& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  for (const FlowEntry& e : entries) {
    if (e.value == 0) continue;
    if (!result.entries_.empty() && result.entries_.back().row == e.row &&
        result.entries_.back().col == e.col) {
      result.entries_.back().value += e.value;
    } else {
      result.entries_.push_back(e);
    }
  }
  return result;
}

Count FlowMatrix::at(Count row, Count col) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair<Count, Count>{row, col},
                             [](const FlowEntry& e, std::pair<Count, Count> k) {
                               return e.row != k.first ? e.row < k.first
                                                       : e.col < k.second;
                             });
  if (it != entries_.end() && it->row == row && it->col == col) {
    return it->value;
  }
  return 0;
}

Count FlowMatrix::trace() const {
  Count t = 0;
  for (const FlowEntry& e : entries_) {
    if (e.row == e.col) t += e.value;
  }
  return t;
}

Count FlowMatrix::total() const {
  Count t = 0;
  for (const FlowEntry& e : entries_) t += e.value;
  return t;
}

std::vector<Count> FlowMatrix::row_sums() const {
  std::vector<Count> sums(static_cast<std::size_t>(rows_), 0);
  for (const FlowEntry& e : entries_) sums[static_cast<std::size_t>(e.row)] += e.value;
  return sums;
}

std::vector<Count> FlowMatrix::col_sums() const {
  std::vector<Count> sums(static_cast<std::size_t>(cols_), 0);
  for (const FlowEntry& e : entries_) sums[static_cast<std::size_t>(e.col)] += e.value;
  return sums;
}

Matrix FlowMatrix::to_dense() const {
  Matrix dense = Matrix::Zero(rows_, cols_);
  for (const FlowEntry& e : entries_) {
    dense(e.row, e.col) = static_cast<double>(e.value);
  }
  return dense;
}

CostMatrix::CostMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.rows() != values_.cols()) {
    throw std::invalid_argument("cost matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("cost entries must be finite and >= 0");
      }
    }
  }
}

CostMatrix CostMatrix::two_level(Eigen::Index n, double diag, double off) {
  Matrix values = Matrix::Constant(n, n, off);
  values.diagonal().setConstant(diag);
  return CostMatrix(std::move(values));
}

Count trace_max_value(const Marginals& m) {
  auto gamma = m.gamma();
  auto eta = m.eta();
  Count z = 0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    z += std::min(eta[i], gamma[i]);
  }
  return z;
}

// Construction behind the closed-form maximizer:
//   1. If eta == gamma the diagonal matrix diag(eta) is optimal.
//   2. Otherwise reorder so the coordinates with eta_i <= gamma_i come first
//      (split index m, 1 <= m <= n-1), fix the diagonal to min{eta_i, gamma_i}
//      and zero the first m columns and last n-m rows off the diagonal.
//   3. The remaining m x (n-m) block must carry the residual marginals
//      gamma' = (gamma - eta) on the first m coordinates and
//      eta' = (eta - gamma) on the rest; any feasible point works and the
//      northwest-corner rule supplies one with at most n-1 nonzeros.
//   4. Undo the reordering.
TraceMaxWitness trace_max_witness(const Marginals& m) {
  auto gamma = m.gamma();
  auto eta = m.eta();
  const Count n = static_cast<Count>(m.size());

  std::vector<Count> permutation;
  permutation.reserve(static_cast<std::size_t>(n));
  for (Count i = 0; i < n; ++i) {
    if (eta[static_cast<std::size_t>(i)] <= gamma[static_cast<std::size_t>(i)]) {
      permutation.push_back(i);
    }
  }
  const Count split = static_cast<Count>(permutation.size());
  for (Count i = 0; i < n; ++i) {
    if (eta[static_cast<std::size_t>(i)] > gamma[static_cast<std::size_t>(i)]) {
      permutation.push_back(i);
    }
  }

  std::vector<FlowEntry> entries;
  entries.reserve(static_cast<std::size_t>(2 * n));
  for (Count i = 0; i < n; ++i) {
    Count v = std::min(eta[static_cast<std::size_t>(i)],
                       gamma[static_cast<std::size_t>(i)]);
    if (v > 0) entries.push_back({i, i, v});
  }

  if (split == n) {
    // eta == gamma: the diagonal already satisfies every constraint.
    return TraceMaxWitness{std::move(permutation), n, {}, {},
                           FlowMatrix::from_entries(n, n, std::move(entries))};
  }

  std::vector<Count> residual_gamma(static_cast<std::size_t>(split));
  std::vector<Count> residual_eta(static_cast<std::size_t>(n - split));
  for (Count i = 0; i < split; ++i) {
    Count orig = permutation[static_cast<std::size_t>(i)];
    residual_gamma[static_cast<std::size_t>(i)] =
        gamma[static_cast<std::size_t>(orig)] - eta[static_cast<std::size_t>(orig)];
  }
  for (Count j = split; j < n; ++j) {
    Count orig = permutation[static_cast<std::size_t>(j)];
    residual_eta[static_cast<std::size_t>(j - split)] =
        eta[static_cast<std::size_t>(orig)] - gamma[static_cast<std::size_t>(orig)];
  }

  FlowMatrix block = northwest_corner_fill(residual_gamma, residual_eta);
  for (const FlowEntry& e : block.entries()) {
    entries.push_back({permutation[static_cast<std::size_t>(e.row)],
                       permutation[static_cast<std::size_t>(split + e.col)],
                       e.value});
  }

  return TraceMaxWitness{std::move(permutation), split,
                         std::move(residual_gamma), std::move(residual_eta),
                         FlowMatrix::from_entries(n, n, std::move(entries))};
}

FlowMatrix northwest_corner_fill(std::span<const Count> row_marginals,
                                 std::span<const Count> col_marginals) {
  if (row_marginals.empty() || col_marginals.empty()) {
    throw std::invalid_argument("marginals must have length >= 1");
  }
  Count row_total = 0;
  Count col_total = 0;
  for (Count v : row_marginals) {
    if (v < 0) throw std::invalid_argument("negative row marginal");
    row_total += v;
  }
  for (Count v : col_marginals) {
    if (v < 0) throw std::invalid_argument("negative column marginal");
    col_total += v;
  }
  if (row_total != col_total) {
    throw InfeasibleMarginals("northwest-corner fill: marginal sums differ",
                              row_total, col_total);
  }

  const Count p = static_cast<Count>(row_marginals.size());
  const Count q = static_cast<Count>(col_marginals.size());
  std::vector<FlowEntry> entries;
  Count i = 0;
  Count j = 0;
  Count row_left = row_marginals[0];
  Count col_left = col_marginals[0];
  while (i < p && j < q) {
    Count take = std::min(row_left, col_left);
    if (take > 0) entries.push_back({i, j, take});
    row_left -= take;
    col_left -= take;
    if (row_left == 0) {
      ++i;
      if (i < p) row_left = row_marginals[static_cast<std::size_t>(i)];
    } else {
      ++j;
      if (j < q) col_left = col_marginals[static_cast<std::size_t>(j)];
    }
  }
  return FlowMatrix::from_entries(p, q, std::move(entries));
}

std::optional<TwoLevelCost> detect_two_level(const CostMatrix& cost,
                                             double tolerance) {
  const Eigen::Index n = cost.size();
  if (n < 2) return std::nullopt;
  const double diag = cost.at(0, 0);
  const double off = cost.at(0, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double target = i == j ? diag : off;
      if (std::abs(cost.at(i, j) - target) > tolerance) return std::nullopt;
    }
  }
  if (!(off - diag > tolerance)) return std::nullopt;
  return TwoLevelCost{diag, off};
}

LpSolution solve_lp(const Marginals& m, const CostMatrix& cost) {
  if (cost.size() != static_cast<Eigen::Index>(m.size())) {
    throw std::invalid_argument("cost matrix dimension does not match marginals");
  }
  if (auto two_level = detect_two_level(cost)) {
    // Minimizing d*tr(X) + o*(k - tr(X)) means maximizing the trace.
    TraceMaxWitness witness = trace_max_witness(m);
    double z = static_cast<double>(witness.flow.trace());
    double objective =
        two_level->off_cost * static_cast<double>(m.total()) -
        (two_level->off_cost - two_level->diag_cost) * z;
    return LpSolution{std::move(witness.flow), objective};
  }
  return min_cost_flow_solve(m, cost);
}

AugmentedProblem augment_sink_source(std::span<const Count> e1,
                                     std::span<const Count> e2,
                                     const CostMatrix& cost,
                                     const SinkSourceConfig& cfg) {
  const std::size_t n = e1.size();
  if (n == 0 || e2.size() != n) {
    throw std::invalid_argument("presence vectors must have equal nonzero length");
  }
  if (cost.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("cost matrix dimension does not match presence vectors");
  }
  if (cfg.vanish_cost.size() != n || cfg.spawn_cost.size() != n) {
    throw std::invalid_argument("vanish/spawn cost vectors must have length n");
  }
  if (cfg.initial_virtual_population < 0) {
    throw std::invalid_argument("virtual population u must be >= 0");
  }

  Count delta = 0;
  for (std::size_t i = 0; i < n; ++i) delta += e1[i] - e2[i];
  const Count u = cfg.initial_virtual_population;
  if (u + delta < 0) {
    throw std::invalid_argument(
        "virtual population u=" + std::to_string(u) +
        " too small: needs u >= " + std::to_string(-delta) +
        " to keep the augmented marginal nonnegative");
  }

  std::vector<Count> gamma(e1.begin(), e1.end());
  std::vector<Count> eta(e2.begin(), e2.end());
  gamma.push_back(u);
  eta.push_back(u + delta);

  Matrix augmented = Matrix::Zero(static_cast<Eigen::Index>(n) + 1,
                                  static_cast<Eigen::Index>(n) + 1);
  augmented.topLeftCorner(n, n) = cost.values();
  for (std::size_t i = 0; i < n; ++i) {
    augmented(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) =
        cfg.vanish_cost[i];
    augmented(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) =
        cfg.spawn_cost[i];
  }

  return AugmentedProblem{check_feasible(std::move(gamma), std::move(eta)),
                          CostMatrix(std::move(augmented))};
}

}  // namespace odflow
