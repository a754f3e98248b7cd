#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dra/errors.hpp"

namespace dra {

// Weighted directed graph on nodes 0..n-1. weight(i, j) > 0 means node i
// receives information from node j with that weight. Immutable.
class WeightedDigraph {
 public:
  // weights must be square with nonnegative entries and a zero diagonal.
  explicit WeightedDigraph(Eigen::MatrixXd weights);

  int n() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& weights() const { return a_; }
  double weight(int i, int j) const { return a_(i, j); }

  // Row sums: total weight flowing into each node.
  Eigen::VectorXd in_degrees() const { return a_.rowwise().sum(); }
  // Column sums: total weight flowing out of each node.
  Eigen::VectorXd out_degrees() const { return a_.colwise().sum().transpose(); }

  bool same_edges(const WeightedDigraph& other, double tol = 0.0) const;

 private:
  Eigen::MatrixXd a_;
};

// In-degree Laplacian L = D_in - A. For a weight-balanced graph both L*1 and
// 1^T L vanish.
Eigen::MatrixXd laplacian(const WeightedDigraph& g);

struct BalanceReport {
  bool balanced = false;
  // In-degree minus out-degree per node.
  Eigen::VectorXd imbalance;
};

BalanceReport is_weight_balanced(const WeightedDigraph& g, double tol = 1e-9);

struct GraphSegment {
  double start = 0.0;
  WeightedDigraph graph;
};

// Piecewise-constant graph signal on [0, horizon). Segment k is active on
// [start_k, start_{k+1}), the last one up to the horizon.
class GraphSchedule {
 public:
  // Segments must start at 0, have strictly increasing start times below the
  // horizon, and agree on the node count.
  GraphSchedule(std::vector<GraphSegment> segments, double horizon);

  // Throws std::out_of_range for t outside [0, horizon).
  const WeightedDigraph& graph_at(double t) const;
  int segment_index_at(double t) const;

  const std::vector<GraphSegment>& segments() const { return segments_; }
  double horizon() const { return horizon_; }
  int n() const { return segments_.front().graph.n(); }

  // Per-node supremum of the in-degree over all segments.
  Eigen::VectorXd max_in_degrees() const;

 private:
  std::vector<GraphSegment> segments_;
  double horizon_;
};

// True when the union of all edges active anywhere in [t0, t1) forms a
// strongly connected digraph. The window must satisfy 0 <= t0 < t1 <= horizon.
bool union_strongly_connected(const GraphSchedule& s, double t0, double t1);

// Two unit-weight directed cycles on ten nodes, alternating every second.
GraphSchedule default_ten_node_schedule(double horizon = 300.0);

}  // namespace dra
