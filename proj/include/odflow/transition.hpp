#pragma once

#include <span>
#include <vector>

#include "odflow/polytope.hpp"

namespace odflow {

// Row sums of stochastic matrices and histogram weights must match 1 within
// this absolute tolerance.
inline constexpr double kRowSumTolerance = 1e-9;

// Dense row-stochastic matrix: entries in [0, 1], each row summing to 1
// within kRowSumTolerance. Dense on purpose; powers destroy sparsity fast.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(Matrix p);

  const Matrix& values() const { return p_; }
  Eigen::Index size() const { return p_.rows(); }

 private:
  Matrix p_;
};

// Discretized trip-duration distribution: weights[i] is the probability of a
// trip lasting about i+1 sampling intervals of length bin_width.
struct DurationHistogram {
  std::vector<double> weights;
  double bin_width = 1.0;
};

// Validates nonnegativity and unit sum.
DurationHistogram make_duration_histogram(std::vector<double> weights,
                                          double bin_width = 1.0);

// Divides each row by its sum. Rows that sum to zero become identity rows
// (an emptied zone keeps its zero population in place).
StochasticMatrix row_normalize(const FlowMatrix& flow);

// Same, for real-valued nonnegative matrices such as averaged flows.
StochasticMatrix row_normalize(const Matrix& flow);

// One transition of a presence vector: returns p^T * presence. Total mass is
// preserved.
Vector propagate(const StochasticMatrix& p, const Vector& presence);

// k-fold product of p with itself via binary exponentiation, k >= 1.
StochasticMatrix k_step_power(const StochasticMatrix& p, Count k);

// Product realizing `steps` transitions that cycle through the chain in
// order: step j applies chain[(j-1) mod len]. Three steps over {A, B} give
// the operator A*B*A, whose transpose maps E_1 to A^T B^T A^T E_1.
StochasticMatrix chained_product(std::span<const StochasticMatrix> chain,
                                 Count steps);

// Convex combination of the k-step and (k+1)-step transitions for a trip
// duration L in [t_k, t_k1]: weight (t_k1 - L)/(t_k1 - t_k) on s_k, so that
// L = t_k returns s_k exactly.
StochasticMatrix duration_interpolate(const StochasticMatrix& s_k,
                                      const StochasticMatrix& s_k1, double t_k,
                                      double t_k1, double duration);

// Histogram-weighted mixture sum_i weights[i] * steps[i], where steps[i] is
// the (i+1)-step transition matrix.
StochasticMatrix histogram_mix(std::span<const StochasticMatrix> steps,
                               const DurationHistogram& histogram);

struct StationaryResult {
  bool converged = false;
  Vector distribution;
  int iterations = 0;
  double residual = 0.0;  // L1 change of the last iterate
};

// Power iteration on p^T from the uniform vector until successive iterates
// differ by less than `tolerance` in L1. A non-converged result signals a
// periodic or slowly mixing chain.
StationaryResult stationary_distribution(const StochasticMatrix& p,
                                         double tolerance = 1e-10,
                                         int max_iterations = 10000);

}  // namespace odflow
