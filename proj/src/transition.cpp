#include "odflow/transition.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace odflow {

namespace {

void check_same_size(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("stochastic matrix dimensions differ");
  }
}

}  // namespace

StochasticMatrix::StochasticMatrix(Matrix p) : p_(std::move(p)) {
  if (p_.rows() < 1 || p_.rows() != p_.cols()) {
    throw std::invalid_argument("stochastic matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      double v = p_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kRowSumTolerance) {
        throw std::invalid_argument("stochastic entries must lie in [0, 1]");
      }
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("row " + std::to_string(i) +
                                  " sums to " + std::to_string(row_sum) +
                                  ", not 1");
    }
  }
}

DurationHistogram make_duration_histogram(std::vector<double> weights,
                                          double bin_width) {
  if (weights.empty()) {
    throw std::invalid_argument("histogram needs at least one bin");
  }
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("bin width must be > 0");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("histogram weights must be finite and >= 0");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw std::invalid_argument("histogram weights must sum to 1");
  }
  return DurationHistogram{std::move(weights), bin_width};
}

StochasticMatrix row_normalize(const FlowMatrix& flow) {
  if (flow.rows() != flow.cols()) {
    throw std::invalid_argument("only square flows can be normalized");
  }
  return row_normalize(flow.to_dense());
}

StochasticMatrix row_normalize(const Matrix& flow) {
  if (flow.rows() < 1 || flow.rows() != flow.cols()) {
    throw std::invalid_argument("only square flows can be normalized");
  }
  Matrix p = Matrix::Zero(flow.rows(), flow.cols());
  for (Eigen::Index i = 0; i < flow.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < flow.cols(); ++j) {
      double v = flow(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("flow entries must be finite and >= 0");
      }
      row_sum += v;
    }
    if (row_sum == 0.0) {
      p(i, i) = 1.0;  // stay-put convention for emptied zones
    } else {
      for (Eigen::Index j = 0; j < flow.cols(); ++j) {
        p(i, j) = flow(i, j) / row_sum;
      }
    }
  }
  return StochasticMatrix(std::move(p));
}

Vector propagate(const StochasticMatrix& p, const Vector& presence) {
  if (presence.size() != p.size()) {
    throw std::invalid_argument("presence vector dimension does not match");
  }
  return p.values().transpose() * presence;
}

StochasticMatrix k_step_power(const StochasticMatrix& p, Count k) {
  if (k < 1) throw std::invalid_argument("power must be >= 1");
  Matrix result = Matrix::Identity(p.size(), p.size());
  Matrix base = p.values();
  Count e = k;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return StochasticMatrix(std::move(result));
}

StochasticMatrix chained_product(std::span<const StochasticMatrix> chain,
                                 Count steps) {
  if (chain.empty()) throw std::invalid_argument("chain must be nonempty");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  for (const StochasticMatrix& p : chain) check_same_size(chain[0], p);

  if (chain.size() == 1) return k_step_power(chain[0], steps);

  Matrix result = chain[0].values();
  for (Count j = 2; j <= steps; ++j) {
    result = result * chain[static_cast<std::size_t>((j - 1) %
                                                     static_cast<Count>(chain.size()))]
                          .values();
  }
  return StochasticMatrix(std::move(result));
}

StochasticMatrix duration_interpolate(const StochasticMatrix& s_k,
                                      const StochasticMatrix& s_k1, double t_k,
                                      double t_k1, double duration) {
  check_same_size(s_k, s_k1);
  if (!(t_k < t_k1)) {
    throw std::invalid_argument("need t_k < t_k1");
  }
  if (duration < t_k || duration > t_k1) {
    throw std::invalid_argument("duration lies outside [t_k, t_k1]");
  }
  const double w = (t_k1 - duration) / (t_k1 - t_k);
  return StochasticMatrix(w * s_k.values() + (1.0 - w) * s_k1.values());
}

StochasticMatrix histogram_mix(std::span<const StochasticMatrix> steps,
                               const DurationHistogram& histogram) {
  if (steps.size() != histogram.weights.size()) {
    throw std::invalid_argument("need one transition matrix per histogram bin");
  }
  for (const StochasticMatrix& p : steps) check_same_size(steps[0], p);
  Matrix mixed = Matrix::Zero(steps[0].size(), steps[0].size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    mixed += histogram.weights[i] * steps[i].values();
  }
  return StochasticMatrix(std::move(mixed));
}

StationaryResult stationary_distribution(const StochasticMatrix& p,
                                         double tolerance,
                                         int max_iterations) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

  const Eigen::Index n = p.size();
  Vector f = Vector::Constant(n, 1.0 / static_cast<double>(n));
  StationaryResult result;
  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    Vector next = p.values().transpose() * f;
    next /= next.sum();
    double change = (next - f).lpNorm<1>();
    f = std::move(next);
    if (change < tolerance) {
      result.converged = true;
      result.iterations = iteration;
      result.residual = change;
      result.distribution = std::move(f);
      return result;
    }
    result.residual = change;
    result.iterations = iteration;
  }
  result.distribution = std::move(f);
  return result;
}

}  // namespace odflow
