#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace dra {

struct TriggerEvent {
  long k = 0;        // sampling index
  double t = 0.0;    // k * ts
  double e_norm_sq = 0.0;
  double threshold = 0.0;
};

// Dense record of one simulation: per-step states, inputs, and diagnostics on
// the integrator grid, plus the communication event log. Vector-valued
// columns are flattened step-major, then node, then coordinate.
struct Trajectory {
  int n = 0;
  int m = 0;
  double dt = 0.0;
  double ts = 0.0;  // 0 for the continuous regime
  std::vector<double> times;
  std::vector<double> lambda;   // [step][node][coord]
  std::vector<double> gamma;    // [step][node][coord]
  std::vector<double> u;        // input in effect on [t_k, t_{k+1})
  std::vector<double> z;        // state derivative of lambda, a pure state function
  std::vector<double> storage;  // [step][node]
  std::vector<double> consensus_err;   // [step] max pairwise ||lambda_i - lambda_j||
  std::vector<double> dual_residual;   // [step] ||sum_i (h_i - d_i)||
  std::vector<double> dist_to_lstar;   // [step] max_i ||lambda_i - lambda*||
  std::vector<std::vector<TriggerEvent>> trigger_log;  // [node]
  // Smallest distance from any recorded dual iterate to its domain boundary.
  double min_boundary_clearance = 0.0;
  bool aborted = false;
  std::string abort_reason;
  // Optimum the diagnostics were evaluated against.
  Eigen::VectorXd lambda_star;
  std::vector<Eigen::VectorXd> gamma_star;

  size_t steps() const { return times.size(); }
  size_t vec_index(size_t s, int i, int c) const {
    return (s * static_cast<size_t>(n) + static_cast<size_t>(i)) * static_cast<size_t>(m) +
           static_cast<size_t>(c);
  }
  size_t node_index(size_t s, int i) const {
    return s * static_cast<size_t>(n) + static_cast<size_t>(i);
  }
  Eigen::Map<const Eigen::VectorXd> lambda_at(size_t s, int i) const {
    return {lambda.data() + vec_index(s, i, 0), m};
  }
  Eigen::Map<const Eigen::VectorXd> gamma_at(size_t s, int i) const {
    return {gamma.data() + vec_index(s, i, 0), m};
  }
  Eigen::Map<const Eigen::VectorXd> u_at(size_t s, int i) const {
    return {u.data() + vec_index(s, i, 0), m};
  }
  Eigen::Map<const Eigen::VectorXd> z_at(size_t s, int i) const {
    return {z.data() + vec_index(s, i, 0), m};
  }
  double storage_at(size_t s, int i) const { return storage[node_index(s, i)]; }
};

}  // namespace dra
