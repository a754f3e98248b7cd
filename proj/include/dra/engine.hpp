#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dra/comms.hpp"
#include "dra/conditions.hpp"
#include "dra/costs.hpp"
#include "dra/graph.hpp"
#include "dra/trajectory.hpp"

namespace dra {

// Residual tolerance for the reference optimum solver.
inline constexpr double kOracleTol = 1e-12;

struct ScenarioConfig {
  ScenarioConfig(std::vector<CostSpec> costs_, GraphSchedule schedule_)
      : costs(std::move(costs_)), schedule(std::move(schedule_)) {}

  std::vector<CostSpec> costs;
  GraphSchedule schedule;
  double alpha = 1.0;
  double beta = 0.05;
  Regime regime = Regime::continuous;
  double ts = 0.0;  // sampling period, ignored in the continuous regime
  double c = 0.0;   // event threshold scale, 0 < c < 1
  double horizon = 300.0;
  double dt = 1e-3;
  unsigned long long seed = 1;
  // Optional explicit primal start; otherwise drawn uniformly from [-2, 2]^m
  // with the seeded generator.
  std::optional<std::vector<Eigen::VectorXd>> x0;
};

// Reference optimum computed independently of any graph or simulation.
struct OracleSolution {
  Eigen::VectorXd lambda_star;
  std::vector<Eigen::VectorXd> x_star;      // h_i(lambda*)
  std::vector<Eigen::VectorXd> gamma_star;  // -alpha (h_i(lambda*) - d_i)
  double residual = 0.0;                    // ||sum_i (h_i - d_i)|| at lambda*
};

// lambda_i(0) = grad f_i(x_i(0)), gamma_i(0) = 0. Deterministic in the seed.
std::vector<NodeState> initialize(const ScenarioConfig& cfg);

// One fixed-step RK4 update of every node with the inputs held constant.
// gamma integrates exactly: gamma += -u * dt.
void step(std::vector<NodeState>& states, const std::vector<Eigen::VectorXd>& u,
          const std::vector<CostSpec>& costs, double alpha, double dt);

// Damped Newton on sum_i (h_i(lambda) - d_i) = 0 over the intersection of the
// dual domains, with a bisection fallback for scalar problems. alpha only
// scales gamma_star.
OracleSolution solve_oracle(const std::vector<CostSpec>& costs, double alpha = 1.0);

struct RunOptions {
  // Degenerates the event regime to periodic exchange by zeroing every
  // trigger threshold. Comparison hook for tests.
  bool force_zero_trigger_coefficient = false;
};

struct RunResult {
  Trajectory trajectory;
  OracleSolution oracle;
  GainCertificate certificate;
};

// Simulates the scenario on the fixed dt grid, recording diagnostics at every
// step. Invalid gain certificates are permitted (divergence probes) except in
// the event regime, where the trigger design requires one. A dual iterate
// leaving its domain aborts the run and records the reason.
RunResult run(const ScenarioConfig& cfg, const RunOptions& opts = {});

struct Summary {
  double terminal_consensus_err = 0.0;
  double terminal_dual_residual = 0.0;
  double terminal_primal_feasibility = 0.0;
  double terminal_dist_to_lstar = 0.0;
  Eigen::VectorXd terminal_node_dist;  // ||lambda_i(T) - lambda*|| per node
  Eigen::VectorXd conservation_max;    // per coordinate max |sum gamma - sum gamma(0)|
  double conservation_max_abs = 0.0;
  std::vector<long> trigger_counts;
  long trigger_total = 0;
  long meaningful_triggers = 0;  // positive hold error at the instant
  double min_boundary_clearance = 0.0;
  double ifp_residual_continuous_max = 0.0;
  double ifp_residual_sampled_max = 0.0;  // NaN outside sampled regimes
  double z_gain_violation_max = 0.0;
  // Largest increase of the summed storage between consecutive checkpoints
  // (steps when continuous, sampling instants otherwise).
  double storage_total_max_increase = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

Summary metrics(const Trajectory& traj, const OracleSolution& oracle,
                const std::vector<CostSpec>& costs, double alpha);

}  // namespace dra
