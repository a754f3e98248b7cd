#pragma once

#include <Eigen/Dense>
#include <string>

#include "dra/graph.hpp"

namespace dra {

// Result of a gain-design check. The algorithm converges when every entry of
// per_node_margin is strictly positive.
struct GainCertificate {
  double alpha = 0.0;
  double beta = 0.0;
  double ts = 0.0;  // 0 marks the continuous regime
  Eigen::VectorXd per_node_margin;
  std::string method;  // centralized-eq13 | distributed-eq14 | sampled-eq19 | heuristic-remark3
  // Supremum of admissible sampling periods at (alpha, beta); +infinity when
  // no node constrains it, negative when even ts = 0 fails.
  double ts_supremum = 0.0;

  bool valid() const {
    return per_node_margin.size() > 0 && (per_node_margin.array() > 0.0).all();
  }
};

// Centralized bound on the consensus gain: for each segment with Laplacian L,
// beta < alpha^2 * s_min+(L + L') / (2 * s_max(L' diag(l^2) L)), minimized
// over segments. s_min+ is the smallest eigenvalue above a relative zero
// threshold. Throws ConfigError on an edgeless segment.
double beta_bound_centralized(const GraphSchedule& schedule,
                              const Eigen::VectorXd& l, double alpha);

// Distributed bound: beta < min_i alpha^2 / (2 l_i^2 din_sup_i), taken over
// nodes that ever have incoming edges. Throws ConfigError when no node does.
double beta_bound_distributed(const Eigen::VectorXd& l,
                              const Eigen::VectorXd& din_sup, double alpha);

// Degree-free heuristic: alpha^2 / (2 * max_i l_i * (n - 1)). Requires n >= 2.
double beta_bound_heuristic(const Eigen::VectorXd& l, int n, double alpha);

// Sampled-regime bound: beta < min_i 1 / (2 din_sup_i (l_i^2/alpha^2 +
// ts l_i/alpha)). Equals the distributed bound at ts = 0.
double beta_bound_sampled(const Eigen::VectorXd& l, const Eigen::VectorXd& din_sup,
                          double alpha, double ts);

// Builds the certificate for given gains: per-node margins
// 1/2 - beta * din_sup_i * (l_i^2/alpha^2 + ts l_i/alpha) and the sampling
// period supremum. An invalid certificate is a value, not an error.
GainCertificate sampling_admissible(const Eigen::VectorXd& l,
                                    const Eigen::VectorXd& din_sup, double alpha,
                                    double beta, double ts);

// Event-threshold multiplier for node i at a sampling instant with in-degree
// din_i_k: (c_i / din_i_k) * margin_i^2, zero for isolated nodes. Requires
// 0 < c_i < 1.
double trigger_coefficient(double l_i, double din_i_k, double alpha, double beta,
                           double ts, double c_i);

}  // namespace dra
