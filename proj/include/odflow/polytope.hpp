#pragma once

#include <optional>
#include <span>
#include <vector>

#include "odflow/core.hpp"

namespace odflow {

// Validated pair of equal-sum nonnegative integer vectors: gamma holds the
// row sums (users leaving each zone), eta the column sums (users arriving).
// Instances only exist through check_feasible, so the invariants
// (same length, entries >= 0, equal totals) always hold.
class Marginals {
 public:
  std::span<const Count> gamma() const { return gamma_; }
  std::span<const Count> eta() const { return eta_; }
  Count total() const { return total_; }
  std::size_t size() const { return gamma_.size(); }

 private:
  friend Marginals check_feasible(std::vector<Count> gamma,
                                  std::vector<Count> eta);
  Marginals(std::vector<Count> gamma, std::vector<Count> eta, Count total)
      : gamma_(std::move(gamma)), eta_(std::move(eta)), total_(total) {}

  std::vector<Count> gamma_;
  std::vector<Count> eta_;
  Count total_;
};

// Validates the marginal pair and returns it as a Marginals value.
// Throws std::invalid_argument on length mismatch or negative entries and
// InfeasibleMarginals when the sums disagree (the polytope is empty).
Marginals check_feasible(std::vector<Count> gamma, std::vector<Count> eta);

struct FlowEntry {
  Count row = 0;
  Count col = 0;
  Count value = 0;

  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

// Sparse nonnegative integer matrix of zone-to-zone trip counts. Entries are
// kept sorted by (row, col); zero values are never stored.
class FlowMatrix {
 public:
  FlowMatrix(Count rows, Count cols);

  // Canonicalizes: merges duplicates, drops zeros, rejects negatives and
  // out-of-range indices.
  static FlowMatrix from_entries(Count rows, Count cols,
                                 std::vector<FlowEntry> entries);

  Count rows() const { return rows_; }
  Count cols() const { return cols_; }
  std::span<const FlowEntry> entries() const { return entries_; }
  std::size_t nonzero_count() const { return entries_.size(); }

  // Value at (row, col); absent entries read as zero.
  Count at(Count row, Count col) const;

  Count trace() const;
  Count total() const;
  std::vector<Count> row_sums() const;
  std::vector<Count> col_sums() const;

  Matrix to_dense() const;

  friend bool operator==(const FlowMatrix&, const FlowMatrix&) = default;

 private:
  Count rows_;
  Count cols_;
  std::vector<FlowEntry> entries_;
};

// Dense nonnegative per-pair movement costs. Square, finite, entries >= 0.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix values);

  // n x n matrix with `diag` on the diagonal and `off` elsewhere.
  static CostMatrix two_level(Eigen::Index n, double diag, double off);

  const Matrix& values() const { return values_; }
  double at(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  Eigen::Index size() const { return values_.rows(); }

 private:
  Matrix values_;
};

// A cost matrix that is constant on the diagonal and constant (strictly
// larger) off it. Minimizing such a cost over the polytope is equivalent to
// maximizing the trace.
struct TwoLevelCost {
  double diag_cost = 0.0;
  double off_cost = 1.0;
};

// Configuration of the virtual sink/source zone used when the user totals
// differ between the two snapshots.
struct SinkSourceConfig {
  Count initial_virtual_population = 0;  // u
  std::vector<double> vanish_cost;       // cost of a user disappearing from zone i
  std::vector<double> spawn_cost;        // cost of a user appearing in zone i
};

// Constructive output of the trace maximizer: the reordering that groups the
// eta<=gamma coordinates first, the split index, the residual marginals of
// the off-diagonal block, and the optimal flow itself.
struct TraceMaxWitness {
  std::vector<Count> permutation;     // position -> original index
  Count split = 0;                    // m; equals n only when eta == gamma
  std::vector<Count> residual_gamma;  // length m
  std::vector<Count> residual_eta;    // length n - m
  FlowMatrix flow;
};

// Maximum achievable trace over the polytope: sum_i min{eta_i, gamma_i}.
// One pass, O(n) time, O(1) extra space.
Count trace_max_value(const Marginals& m);

// Builds an integral flow attaining trace_max_value(m). The flow stores at
// most 2n-1 nonzeros. See the implementation for the construction.
TraceMaxWitness trace_max_witness(const Marginals& m);

// Integral feasible point of the (p, q) transportation polytope via the
// northwest-corner rule; at most p+q-1 nonzeros, O(p+q) time. Rectangular
// inputs are allowed. Throws InfeasibleMarginals on unequal sums.
FlowMatrix northwest_corner_fill(std::span<const Count> row_marginals,
                                 std::span<const Count> col_marginals);

// Recognizes two-level cost matrices within an absolute tolerance. Returns
// nullopt when the matrix has more than two levels, the levels are not
// separated by more than the tolerance, or n < 2.
std::optional<TwoLevelCost> detect_two_level(const CostMatrix& cost,
                                             double tolerance = 1e-12);

struct LpSolution {
  FlowMatrix flow;
  double objective = 0.0;
};

// Exact integral minimizer of trace(C^T X) over the polytope. Dispatches to
// the closed-form trace maximizer when the cost is two-level, otherwise to
// min_cost_flow_solve.
LpSolution solve_lp(const Marginals& m, const CostMatrix& cost);

// Exact integral optimum via successive shortest paths on the complete
// bipartite network. Deterministic: ties are resolved toward the lowest
// (row, col) indices. O(n) augmentations of O(n^2) each in practice.
LpSolution min_cost_flow_solve(const Marginals& m, const CostMatrix& cost);

struct AugmentedProblem {
  Marginals marginals;
  CostMatrix cost;
};

// Adds the virtual (n+1)-th zone balancing unequal totals: gamma' = (e1, u),
// eta' = (e2, u + delta) with delta = sum(e1) - sum(e2). Requires
// u >= max(0, -delta) so the augmented marginal stays nonnegative.
AugmentedProblem augment_sink_source(std::span<const Count> e1,
                                     std::span<const Count> e2,
                                     const CostMatrix& cost,
                                     const SinkSourceConfig& cfg);

}  // namespace odflow
