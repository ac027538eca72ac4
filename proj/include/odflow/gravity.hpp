#pragma once

#include <vector>

#include "odflow/polytope.hpp"

namespace odflow {

struct GravityParams {
  double alpha = 1.0;        // distance-decay exponent
  double cost_floor = 0.1;   // minimum effective cost; keeps zero-cost pairs finite
  double tolerance = 1e-9;   // max marginal deviation at convergence
  int max_iterations = 1000;
};

struct GravityFit {
  bool converged = false;
  Matrix flow;
  Vector origin_factors;       // A_i
  Vector destination_factors;  // B_j
  int iterations = 0;
  double residual = 0.0;       // max marginal deviation after the last sweep
  std::vector<double> residual_history;  // L1 marginal residual per sweep
};

// Doubly-constrained gravity model x_ij = A_i B_j e1_i e2_j /
// max(c_ij, cost_floor)^alpha, fitted by iterative proportional fitting
// until row sums match e1 and column sums match e2 within the tolerance.
// The flow is real-valued. A non-converged result reports the residual
// reached at max_iterations.
GravityFit gravity_fit(const Vector& production, const Vector& attraction,
                       const CostMatrix& cost, const GravityParams& params = {});

struct FlowComparison {
  double l1_distance = 0.0;
  double cosine_similarity = 0.0;
  bool cosine_defined = true;  // false when either matrix is all zero
  Vector row_residual;         // row sums of lhs minus rhs
  Vector col_residual;
};

// Elementwise L1 distance, cosine similarity of the flattened matrices, and
// per-zone marginal residuals.
FlowComparison compare_flows(const Matrix& lhs, const Matrix& rhs);
FlowComparison compare_flows(const Matrix& gravity_flow, const FlowMatrix& lp_flow);

}  // namespace odflow
