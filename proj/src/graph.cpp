#include "dra/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dra {

WeightedDigraph::WeightedDigraph(Eigen::MatrixXd weights) : a_(std::move(weights)) {
  if (a_.rows() != a_.cols()) {
    throw ConfigError("weight matrix must be square, got " +
                      std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()));
  }
  if (a_.rows() < 1) throw ConfigError("graph needs at least one node");
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < n(); ++j) {
      const double w = a_(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw ConfigError("weight (" + std::to_string(i) + "," + std::to_string(j) +
                          ") must be finite and nonnegative");
      }
      if (i == j && w != 0.0) {
        throw ConfigError("self-loop at node " + std::to_string(i));
      }
    }
  }
}

bool WeightedDigraph::same_edges(const WeightedDigraph& other, double tol) const {
  if (other.n() != n()) return false;
  return ((a_ - other.a_).array().abs() <= tol).all();
}

Eigen::MatrixXd laplacian(const WeightedDigraph& g) {
  Eigen::MatrixXd l = -g.weights();
  l.diagonal() = g.in_degrees();
  return l;
}

BalanceReport is_weight_balanced(const WeightedDigraph& g, double tol) {
  BalanceReport r;
  r.imbalance = g.in_degrees() - g.out_degrees();
  r.balanced = (r.imbalance.array().abs() <= tol).all();
  return r;
}

GraphSchedule::GraphSchedule(std::vector<GraphSegment> segments, double horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  if (segments_.empty()) throw ConfigError("schedule needs at least one segment");
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw ConfigError("schedule horizon must be positive and finite");
  }
  if (segments_.front().start != 0.0) {
    throw ConfigError("first segment must start at t = 0");
  }
  const int nn = segments_.front().graph.n();
  for (size_t k = 0; k < segments_.size(); ++k) {
    if (segments_[k].graph.n() != nn) {
      throw ConfigError("segment " + std::to_string(k) + " changes the node count");
    }
    if (k > 0 && !(segments_[k].start > segments_[k - 1].start)) {
      throw ConfigError("segment start times must be strictly increasing");
    }
  }
  if (!(segments_.back().start < horizon_)) {
    throw ConfigError("last segment starts at or after the horizon");
  }
}

int GraphSchedule::segment_index_at(double t) const {
  if (!(t >= 0.0) || !(t < horizon_)) {
    throw std::out_of_range("time " + std::to_string(t) + " outside [0, " +
                            std::to_string(horizon_) + ")");
  }
  // Last segment whose start is <= t.
  int lo = 0, hi = static_cast<int>(segments_.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (segments_[mid].start <= t) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

const WeightedDigraph& GraphSchedule::graph_at(double t) const {
  return segments_[segment_index_at(t)].graph;
}

Eigen::VectorXd GraphSchedule::max_in_degrees() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n());
  for (const auto& seg : segments_) {
    d = d.cwiseMax(seg.graph.in_degrees());
  }
  return d;
}

bool union_strongly_connected(const GraphSchedule& s, double t0, double t1) {
  if (!(t0 >= 0.0) || !(t1 > t0) || !(t1 <= s.horizon())) {
    throw ConfigError("window must satisfy 0 <= t0 < t1 <= horizon");
  }
  const int nn = s.n();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(nn, nn);
  const auto& segs = s.segments();
  for (size_t k = 0; k < segs.size(); ++k) {
    const double seg_end = (k + 1 < segs.size()) ? segs[k + 1].start : s.horizon();
    if (segs[k].start < t1 && seg_end > t0) {
      u = u.cwiseMax(segs[k].graph.weights());
    }
  }
  // BFS over successors and predecessors from node 0; strong connectivity on
  // the union graph is equivalent to full reachability both ways.
  auto reach = [&](bool forward) {
    std::vector<char> seen(nn, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < nn; ++w) {
        // Edge j -> i carries information from j to i, so successors of v are
        // the nodes i with u(i, v) > 0.
        const double e = forward ? u(w, v) : u(v, w);
        if (e > 0.0 && !seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == nn;
  };
  return reach(true) && reach(false);
}

GraphSchedule default_ten_node_schedule(double horizon) {
  const int nn = 10;
  auto cycle = [&](const std::vector<int>& order) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nn, nn);
    for (int idx = 0; idx < nn; ++idx) {
      const int to = order[idx];
      const int from = order[(idx + nn - 1) % nn];
      a(to, from) = 1.0;
    }
    return WeightedDigraph(a);
  };
  const WeightedDigraph g1 = cycle({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const WeightedDigraph g2 = cycle({0, 2, 4, 6, 8, 1, 3, 5, 7, 9});
  std::vector<GraphSegment> segs;
  const int whole = static_cast<int>(std::ceil(horizon));
  for (int k = 0; k < whole; ++k) {
    segs.push_back({static_cast<double>(k), (k % 2 == 0) ? g1 : g2});
  }
  return GraphSchedule(std::move(segs), horizon);
}

}  // namespace dra
