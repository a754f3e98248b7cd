#pragma once

#include <ostream>
#include <string>

#include "dra/engine.hpp"

namespace dra {

// Shortest decimal form with 17 significant digits; round-trips to the same
// double.
std::string fmt17(double v);

const char* regime_name(Regime r);

// One row per (step, node):
// t,node,lambda_*,gamma_*,u_*,V,consensus_err,dual_residual,dist_to_lstar
// with LF line endings. The u columns hold the input in effect on the
// interval starting at t.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// Trigger log, grouped by node: node,k,t,e_norm_sq,threshold.
void write_events_csv(std::ostream& out, const Trajectory& traj);

// Flat key=value summary of a finished run.
void write_summary(std::ostream& out, const ScenarioConfig& cfg,
                   const RunResult& result, const Summary& s);

}  // namespace dra
