#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "odflow/polytope.hpp"

namespace odflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node layout for the complete bipartite network: 0..n-1 are origin zones
// (supply gamma_i), n..2n-1 are destination zones (demand eta_j). Forward
// arcs i -> n+j carry cost c_ij and unlimited capacity; a residual arc
// n+j -> i exists whenever x_ij > 0 and carries cost -c_ij.
struct SearchState {
  std::vector<double> dist;
  std::vector<Count> parent;  // predecessor node, -1 at sources
  std::vector<char> done;
};

}  // namespace

LpSolution min_cost_flow_solve(const Marginals& m, const CostMatrix& cost) {
  const Count n = static_cast<Count>(m.size());
  if (cost.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("cost matrix dimension does not match marginals");
  }
  const Matrix& c = cost.values();

  std::vector<Count> supply(m.gamma().begin(), m.gamma().end());
  std::vector<Count> demand(m.eta().begin(), m.eta().end());
  std::vector<Count> flow(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  auto flow_at = [&](Count i, Count j) -> Count& {
    return flow[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                static_cast<std::size_t>(j)];
  };

  const Count node_count = 2 * n;
  std::vector<double> potential(static_cast<std::size_t>(node_count), 0.0);
  SearchState s;
  s.dist.resize(static_cast<std::size_t>(node_count));
  s.parent.resize(static_cast<std::size_t>(node_count));
  s.done.resize(static_cast<std::size_t>(node_count));

  Count remaining = m.total();
  while (remaining > 0) {
    std::fill(s.dist.begin(), s.dist.end(), kInf);
    std::fill(s.parent.begin(), s.parent.end(), Count{-1});
    std::fill(s.done.begin(), s.done.end(), char{0});
    for (Count i = 0; i < n; ++i) {
      if (supply[static_cast<std::size_t>(i)] > 0) {
        s.dist[static_cast<std::size_t>(i)] = 0.0;
      }
    }

    // Dense Dijkstra over reduced costs; the scan order makes every tie fall
    // to the lowest node index, so the returned optimum is canonical.
    Count target = -1;
    while (true) {
      Count u = -1;
      double best = kInf;
      for (Count v = 0; v < node_count; ++v) {
        if (!s.done[static_cast<std::size_t>(v)] &&
            s.dist[static_cast<std::size_t>(v)] < best) {
          best = s.dist[static_cast<std::size_t>(v)];
          u = v;
        }
      }
      if (u < 0) break;  // nothing reachable is left
      s.done[static_cast<std::size_t>(u)] = 1;
      if (u >= n && demand[static_cast<std::size_t>(u - n)] > 0) {
        target = u;
        break;
      }
      const double du = s.dist[static_cast<std::size_t>(u)];
      if (u < n) {
        for (Count j = 0; j < n; ++j) {
          const Count v = n + j;
          if (s.done[static_cast<std::size_t>(v)]) continue;
          double w = c(u, j) + potential[static_cast<std::size_t>(u)] -
                     potential[static_cast<std::size_t>(v)];
          if (w < 0.0) w = 0.0;  // clamp float drift in reduced costs
          if (du + w < s.dist[static_cast<std::size_t>(v)]) {
            s.dist[static_cast<std::size_t>(v)] = du + w;
            s.parent[static_cast<std::size_t>(v)] = u;
          }
        }
      } else {
        const Count j = u - n;
        for (Count i = 0; i < n; ++i) {
          if (s.done[static_cast<std::size_t>(i)] || flow_at(i, j) <= 0) continue;
          double w = -c(i, j) + potential[static_cast<std::size_t>(u)] -
                     potential[static_cast<std::size_t>(i)];
          if (w < 0.0) w = 0.0;
          if (du + w < s.dist[static_cast<std::size_t>(i)]) {
            s.dist[static_cast<std::size_t>(i)] = du + w;
            s.parent[static_cast<std::size_t>(i)] = u;
          }
        }
      }
    }
    if (target < 0) {
      // Cannot happen for validated marginals: the bipartite network is
      // complete, so every unit of supply reaches every sink.
      throw std::logic_error("min-cost flow: no augmenting path found");
    }

    const double dist_target = s.dist[static_cast<std::size_t>(target)];
    for (Count v = 0; v < node_count; ++v) {
      potential[static_cast<std::size_t>(v)] +=
          std::min(s.dist[static_cast<std::size_t>(v)], dist_target);
    }

    // Bottleneck along the path: end demand, start supply, and every
    // residual arc traversed backwards.
    Count bottleneck = demand[static_cast<std::size_t>(target - n)];
    Count v = target;
    while (s.parent[static_cast<std::size_t>(v)] >= 0) {
      Count u = s.parent[static_cast<std::size_t>(v)];
      if (u >= n) bottleneck = std::min(bottleneck, flow_at(v, u - n));
      v = u;
    }
    bottleneck = std::min(bottleneck, supply[static_cast<std::size_t>(v)]);

    Count w = target;
    while (s.parent[static_cast<std::size_t>(w)] >= 0) {
      Count u = s.parent[static_cast<std::size_t>(w)];
      if (u < n) {
        flow_at(u, w - n) += bottleneck;
      } else {
        flow_at(w, u - n) -= bottleneck;
      }
      w = u;
    }
    supply[static_cast<std::size_t>(w)] -= bottleneck;
    demand[static_cast<std::size_t>(target - n)] -= bottleneck;
    remaining -= bottleneck;
  }

  std::vector<FlowEntry> entries;
  double objective = 0.0;
  for (Count i = 0; i < n; ++i) {
    for (Count j = 0; j < n; ++j) {
      Count x = flow_at(i, j);
      if (x > 0) {
        entries.push_back({i, j, x});
        objective += static_cast<double>(x) * c(i, j);
      }
    }
  }
  return LpSolution{FlowMatrix::from_entries(n, n, std::move(entries)),
                    objective};
}

}  // namespace odflow
