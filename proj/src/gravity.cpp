#include "odflow/gravity.hpp"

#include <cmath>
#include <stdexcept>

namespace odflow {

GravityFit gravity_fit(const Vector& production, const Vector& attraction,
                       const CostMatrix& cost, const GravityParams& params) {
  const Eigen::Index n = production.size();
  if (n < 1 || attraction.size() != n) {
    throw std::invalid_argument("production/attraction vectors must have equal nonzero length");
  }
  if (cost.size() != n) {
    throw std::invalid_argument("cost matrix dimension does not match");
  }
  if (!(params.alpha > 0.0) || !(params.cost_floor > 0.0) ||
      !(params.tolerance > 0.0) || params.max_iterations < 1) {
    throw std::invalid_argument("invalid gravity parameters");
  }
  double production_total = 0.0;
  double attraction_total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(production(i) >= 0.0) || !(attraction(i) >= 0.0)) {
      throw std::invalid_argument("marginal entries must be >= 0");
    }
    production_total += production(i);
    attraction_total += attraction(i);
  }
  const double scale = std::max(production_total, attraction_total);
  if (std::abs(production_total - attraction_total) > 1e-6 * std::max(scale, 1.0)) {
    throw std::invalid_argument("production and attraction totals differ");
  }

  GravityFit fit;
  fit.origin_factors = Vector::Ones(n);
  fit.destination_factors = Vector::Ones(n);
  if (scale == 0.0) {
    fit.flow = Matrix::Zero(n, n);
    fit.converged = true;
    return fit;
  }

  Matrix seed(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double effective = std::max(cost.at(i, j), params.cost_floor);
      seed(i, j) = production(i) * attraction(j) / std::pow(effective, params.alpha);
    }
  }

  Vector& a = fit.origin_factors;
  Vector& b = fit.destination_factors;
  for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double row = seed.row(i).dot(b);
      if (row == 0.0) {
        if (production(i) != 0.0) {
          throw std::invalid_argument(
              "zone " + std::to_string(i) +
              " has zero gravity seed but a nonzero production marginal");
        }
        a(i) = 0.0;
      } else {
        a(i) = production(i) / row;
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      double col = seed.col(j).dot(a);
      if (col == 0.0) {
        if (attraction(j) != 0.0) {
          throw std::invalid_argument(
              "zone " + std::to_string(j) +
              " has zero gravity seed but a nonzero attraction marginal");
        }
        b(j) = 0.0;
      } else {
        b(j) = attraction(j) / col;
      }
    }

    fit.flow = a.asDiagonal() * seed * b.asDiagonal();
    Vector row_gap = fit.flow.rowwise().sum() - production;
    Vector col_gap = fit.flow.colwise().sum().transpose() - attraction;
    fit.iterations = iteration;
    fit.residual = std::max(row_gap.lpNorm<Eigen::Infinity>(),
                            col_gap.lpNorm<Eigen::Infinity>());
    fit.residual_history.push_back(row_gap.lpNorm<1>() + col_gap.lpNorm<1>());
    if (fit.residual < params.tolerance) {
      fit.converged = true;
      return fit;
    }
  }
  return fit;
}

FlowComparison compare_flows(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    throw std::invalid_argument("flow dimensions differ");
  }
  FlowComparison result;
  result.l1_distance = (lhs - rhs).lpNorm<1>();
  const double lhs_norm = lhs.norm();
  const double rhs_norm = rhs.norm();
  if (lhs_norm == 0.0 || rhs_norm == 0.0) {
    result.cosine_defined = false;
    result.cosine_similarity = 0.0;
  } else {
    result.cosine_similarity =
        lhs.cwiseProduct(rhs).sum() / (lhs_norm * rhs_norm);
  }
  result.row_residual = lhs.rowwise().sum() - rhs.rowwise().sum();
  result.col_residual =
      (lhs.colwise().sum() - rhs.colwise().sum()).transpose();
  return result;
}

FlowComparison compare_flows(const Matrix& gravity_flow,
                             const FlowMatrix& lp_flow) {
  return compare_flows(gravity_flow, lp_flow.to_dense());
}

}  // namespace odflow
