#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "dra/costs.hpp"
#include "dra/graph.hpp"
#include "dra/trajectory.hpp"

namespace dra {

struct NodeState {
  Eigen::VectorXd lambda;
  Eigen::VectorXd gamma;
};

// Where the peer vectors feeding a coupling input came from.
enum class CouplingSource { continuous_states, sampled_states, broadcast_states };

struct CouplingInput {
  Eigen::VectorXd u;
  CouplingSource source = CouplingSource::continuous_states;
};

struct NodeDerivative {
  Eigen::VectorXd dlambda;
  Eigen::VectorXd dgamma;
};

// Node flow: dlambda = -alpha (h(lambda) - d) - gamma, dgamma = -u.
NodeDerivative node_rhs(const NodeState& s, const Eigen::VectorXd& u,
                        const CostSpec& cost, double alpha);

// Diffusive coupling u_i = beta * sum_j a_ij (v_j - v_i).
CouplingInput coupling(const std::vector<Eigen::VectorXd>& v, const WeightedDigraph& g,
                       int i, double beta,
                       CouplingSource source = CouplingSource::continuous_states);

// Storage function certifying input-feedforward passivity of one node with
// respect to the shifted input u and output lambda - lambda_star:
//   V = (l/alpha) ||z||^2 - (lambda - lambda*)'(gamma - gamma*)
//       + alpha (J(lambda*) - J(lambda) + (h(lambda*) - d)'(lambda - lambda*))
// where z = -alpha (h(lambda) - d) - gamma is the lambda-velocity.
double storage_value(const NodeState& s, const Eigen::VectorXd& lambda_star,
                     const Eigen::VectorXd& gamma_star, const CostSpec& cost,
                     double alpha);

// Largest violation of the integrated passivity inequality
//   V(t2) - V(t1) <= int (lambda - lambda*)'u + (l^2/alpha^2) u'u dt
// over consecutive recorded steps in [first, last]. The supply integral is
// exact for the piecewise-constant input realization; the flow integral uses
// the trapezoid rule. Nonpositive results mean the inequality held.
double ifp_residual_continuous(const Trajectory& traj, int i, double l_i, double alpha,
                               size_t first = 0, size_t last = SIZE_MAX);

// Discrete analogue at sampling instants: with Vbar(k) = (V(k Ts) +
// (Ts/2) ||z(k Ts)||^2) / Ts, checks
//   Vbar(k+1) - Vbar(k) <= (lambda_bar - lambda*)'u + (l^2/a^2 + Ts l/a) u'u.
// Throws ConfigError when the trajectory grid is not aligned to ts.
double ifp_residual_sampled(const Trajectory& traj, int i, double l_i, double alpha,
                            double ts);

// Largest violation of the integrated velocity-gain inequality
//   (l/alpha)(||z(t2)||^2 - ||z(t1)||^2) <= (l^2/alpha^2) int ||u||^2 - int ||z||^2
// over hold intervals (sampling intervals when traj.ts > 0, single steps
// otherwise).
double z_gain_check(const Trajectory& traj, int i, double l_i, double alpha);

}  // namespace dra
