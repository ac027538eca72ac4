#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace odflow {

// Integer people/event counts. Marginals, flows and totals are integral
// throughout; real-valued inputs must be rounded before they reach the
// solvers.
using Count = std::int64_t;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Raised when a pair of marginal vectors cannot define a transportation
// polytope (unequal sums). Carries both sums so callers can report the gap.
class InfeasibleMarginals : public std::runtime_error {
 public:
  InfeasibleMarginals(const std::string& what, Count gamma_total,
                      Count eta_total)
      : std::runtime_error(what),
        gamma_total_(gamma_total),
        eta_total_(eta_total) {}

  Count gamma_total() const { return gamma_total_; }
  Count eta_total() const { return eta_total_; }

 private:
  Count gamma_total_;
  Count eta_total_;
};

// Raised on malformed input files; line numbers are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Raised when an iterative method exhausts its iteration budget and the
// caller required convergence.
class NonConvergence : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Independent per-stream seed derived from a base seed (splitmix64 mix).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace odflow
