#include "dra/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dra {

namespace {

// Integrator grid spacing of a recorded trajectory segment, validated against
// the stored dt.
void check_recorded(const Trajectory& traj, int i) {
  if (i < 0 || i >= traj.n) throw ConfigError("node index out of range");
  if (traj.steps() < 2) throw ConfigError("need at least two recorded points");
  if (traj.lambda_star.size() != traj.m) {
    throw ConfigError("trajectory carries no optimum to measure against");
  }
}

long sampled_stride(const Trajectory& traj, double ts) {
  if (!(ts > 0.0)) throw ConfigError("ts must be positive");
  if (!(traj.dt > 0.0)) throw ConfigError("trajectory has no grid spacing");
  const long stride = std::lround(ts / traj.dt);
  if (stride < 1 || std::abs(static_cast<double>(stride) * traj.dt - ts) > 1e-9 * ts) {
    throw ConfigError("trajectory grid is not aligned to the sampling period");
  }
  return stride;
}

}  // namespace

NodeDerivative node_rhs(const NodeState& s, const Eigen::VectorXd& u,
                        const CostSpec& cost, double alpha) {
  if (s.lambda.size() != cost.dim() || s.gamma.size() != cost.dim() ||
      u.size() != cost.dim()) {
    throw ConfigError("state and input must match the cost dimension");
  }
  NodeDerivative d;
  d.dlambda = -alpha * (cost.inverse_gradient(s.lambda) - cost.demand()) - s.gamma;
  d.dgamma = -u;
  return d;
}

CouplingInput coupling(const std::vector<Eigen::VectorXd>& v, const WeightedDigraph& g,
                       int i, double beta, CouplingSource source) {
  if (static_cast<int>(v.size()) != g.n()) {
    throw ConfigError("need one vector per node");
  }
  if (i < 0 || i >= g.n()) throw ConfigError("node index out of range");
  CouplingInput out;
  out.source = source;
  out.u = Eigen::VectorXd::Zero(v[i].size());
  for (int j = 0; j < g.n(); ++j) {
    const double w = g.weight(i, j);
    if (w > 0.0) out.u += (beta * w) * (v[j] - v[i]);
  }
  return out;
}

double storage_value(const NodeState& s, const Eigen::VectorXd& lambda_star,
                     const Eigen::VectorXd& gamma_star, const CostSpec& cost,
                     double alpha) {
  const DualFunction dual(cost);
  const Eigen::VectorXd h = cost.inverse_gradient(s.lambda);
  const Eigen::VectorXd z = -alpha * (h - cost.demand()) - s.gamma;
  const Eigen::VectorXd dlam = s.lambda - lambda_star;
  const Eigen::VectorXd dgam = s.gamma - gamma_star;
  const Eigen::VectorXd grad_star = cost.inverse_gradient(lambda_star) - cost.demand();
  const double bregman =
      dual.value(lambda_star) - dual.value(s.lambda) + grad_star.dot(dlam);
  return (cost.lipschitz() / alpha) * z.squaredNorm() - dlam.dot(dgam) +
         alpha * bregman;
}

double ifp_residual_continuous(const Trajectory& traj, int i, double l_i, double alpha,
                               size_t first, size_t last) {
  check_recorded(traj, i);
  last = std::min(last, traj.steps() - 1);
  if (first >= last) throw ConfigError("segment needs at least two recorded points");
  const double supply_gain = l_i * l_i / (alpha * alpha);
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t s = first; s < last; ++s) {
    const double dt = traj.times[s + 1] - traj.times[s];
    const Eigen::VectorXd dlam0 = traj.lambda_at(s, i) - traj.lambda_star;
    const Eigen::VectorXd dlam1 = traj.lambda_at(s + 1, i) - traj.lambda_star;
    const auto u = traj.u_at(s, i);
    const double supply =
        0.5 * dt * u.dot(dlam0 + dlam1) + supply_gain * u.squaredNorm() * dt;
    worst = std::max(worst, traj.storage_at(s + 1, i) - traj.storage_at(s, i) - supply);
  }
  return worst;
}

double ifp_residual_sampled(const Trajectory& traj, int i, double l_i, double alpha,
                            double ts) {
  check_recorded(traj, i);
  const long stride = sampled_stride(traj, ts);
  const size_t n_samples = (traj.steps() - 1) / static_cast<size_t>(stride) + 1;
  if (n_samples < 2) {
    throw ConfigError("trajectory spans less than one full sampling interval");
  }
  const double supply_gain = l_i * l_i / (alpha * alpha) + ts * l_i / alpha;
  auto vbar = [&](size_t s) {
    return (traj.storage_at(s, i) + 0.5 * ts * traj.z_at(s, i).squaredNorm()) / ts;
  };
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k + 1 < n_samples; ++k) {
    const size_t s0 = k * static_cast<size_t>(stride);
    const size_t s1 = s0 + static_cast<size_t>(stride);
    const Eigen::VectorXd dlam = traj.lambda_at(s0, i) - traj.lambda_star;
    const auto u = traj.u_at(s0, i);  // held over the whole interval
    const double supply = dlam.dot(u) + supply_gain * u.squaredNorm();
    worst = std::max(worst, vbar(s1) - vbar(s0) - supply);
  }
  return worst;
}

double z_gain_check(const Trajectory& traj, int i, double l_i, double alpha) {
  check_recorded(traj, i);
  const long stride = (traj.ts > 0.0) ? sampled_stride(traj, traj.ts) : 1;
  const double gain = l_i * l_i / (alpha * alpha);
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t s0 = 0; s0 + static_cast<size_t>(stride) < traj.steps();
       s0 += static_cast<size_t>(stride)) {
    const size_t s1 = s0 + static_cast<size_t>(stride);
    double u_int = 0.0, z_int = 0.0;
    for (size_t s = s0; s < s1; ++s) {
      const double dt = traj.times[s + 1] - traj.times[s];
      u_int += traj.u_at(s, i).squaredNorm() * dt;  // exact: u is held per step
      z_int += 0.5 * dt *
               (traj.z_at(s, i).squaredNorm() + traj.z_at(s + 1, i).squaredNorm());
    }
    const double lhs = (l_i / alpha) *
                       (traj.z_at(s1, i).squaredNorm() - traj.z_at(s0, i).squaredNorm());
    worst = std::max(worst, lhs - (gain * u_int - z_int));
  }
  return worst;
}

}  // namespace dra
