#include "dra/report.hpp"

#include <cstdio>

namespace dra {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::continuous: return "continuous";
    case Regime::periodic: return "periodic";
    case Regime::event: return "event";
  }
  return "unknown";
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,node";
  for (int c = 0; c < traj.m; ++c) out << ",lambda_" << c;
  for (int c = 0; c < traj.m; ++c) out << ",gamma_" << c;
  for (int c = 0; c < traj.m; ++c) out << ",u_" << c;
  out << ",V,consensus_err,dual_residual,dist_to_lstar\n";
  for (size_t s = 0; s < traj.steps(); ++s) {
    for (int i = 0; i < traj.n; ++i) {
      out << fmt17(traj.times[s]) << ',' << i;
      for (int c = 0; c < traj.m; ++c) out << ',' << fmt17(traj.lambda[traj.vec_index(s, i, c)]);
      for (int c = 0; c < traj.m; ++c) out << ',' << fmt17(traj.gamma[traj.vec_index(s, i, c)]);
      for (int c = 0; c < traj.m; ++c) out << ',' << fmt17(traj.u[traj.vec_index(s, i, c)]);
      const double dist = (traj.lambda_at(s, i) - traj.lambda_star).norm();
      out << ',' << fmt17(traj.storage_at(s, i)) << ',' << fmt17(traj.consensus_err[s])
          << ',' << fmt17(traj.dual_residual[s]) << ',' << fmt17(dist) << '\n';
    }
  }
}

void write_events_csv(std::ostream& out, const Trajectory& traj) {
  out << "node,k,t,e_norm_sq,threshold\n";
  for (size_t i = 0; i < traj.trigger_log.size(); ++i) {
    for (const auto& ev : traj.trigger_log[i]) {
      out << i << ',' << ev.k << ',' << fmt17(ev.t) << ',' << fmt17(ev.e_norm_sq)
          << ',' << fmt17(ev.threshold) << '\n';
    }
  }
}

namespace {

// key=value lines must stay single-line; free text gets flattened.
std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

void write_summary(std::ostream& out, const ScenarioConfig& cfg,
                   const RunResult& result, const Summary& s) {
  const Trajectory& traj = result.trajectory;
  out << "regime=" << regime_name(cfg.regime) << '\n';
  out << "n=" << traj.n << '\n';
  out << "m=" << traj.m << '\n';
  out << "alpha=" << fmt17(cfg.alpha) << '\n';
  out << "beta=" << fmt17(cfg.beta) << '\n';
  out << "ts=" << fmt17(traj.ts) << '\n';
  if (cfg.regime == Regime::event) out << "c=" << fmt17(cfg.c) << '\n';
  out << "horizon=" << fmt17(cfg.horizon) << '\n';
  out << "dt=" << fmt17(cfg.dt) << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "certificate_method=" << result.certificate.method << '\n';
  out << "certificate_valid=" << (result.certificate.valid() ? 1 : 0) << '\n';
  out << "certificate_min_margin=" << fmt17(result.certificate.per_node_margin.minCoeff())
      << '\n';
  out << "ts_supremum=" << fmt17(result.certificate.ts_supremum) << '\n';
  out << "aborted=" << (s.aborted ? 1 : 0) << '\n';
  out << "abort_reason=" << one_line(s.abort_reason) << '\n';
  for (int c = 0; c < traj.m; ++c) {
    out << "lambda_star_" << c << '=' << fmt17(result.oracle.lambda_star(c)) << '\n';
  }
  out << "oracle_residual=" << fmt17(result.oracle.residual) << '\n';
  out << "steps_recorded=" << traj.steps() << '\n';
  out << "terminal_consensus_err=" << fmt17(s.terminal_consensus_err) << '\n';
  out << "terminal_dual_residual=" << fmt17(s.terminal_dual_residual) << '\n';
  out << "terminal_primal_feasibility=" << fmt17(s.terminal_primal_feasibility) << '\n';
  out << "terminal_dist_to_lstar=" << fmt17(s.terminal_dist_to_lstar) << '\n';
  for (int i = 0; i < s.terminal_node_dist.size(); ++i) {
    out << "terminal_dist_node_" << i << '=' << fmt17(s.terminal_node_dist(i)) << '\n';
  }
  out << "conservation_max=" << fmt17(s.conservation_max_abs) << '\n';
  out << "min_boundary_clearance=" << fmt17(s.min_boundary_clearance) << '\n';
  out << "ifp_residual_continuous_max=" << fmt17(s.ifp_residual_continuous_max) << '\n';
  if (traj.ts > 0.0) {
    out << "ifp_residual_sampled_max=" << fmt17(s.ifp_residual_sampled_max) << '\n';
  }
  out << "z_gain_violation_max=" << fmt17(s.z_gain_violation_max) << '\n';
  out << "storage_total_max_increase=" << fmt17(s.storage_total_max_increase) << '\n';
  if (cfg.regime != Regime::continuous) {
    for (size_t i = 0; i < s.trigger_counts.size(); ++i) {
      out << "trigger_count_node_" << i << '=' << s.trigger_counts[i] << '\n';
    }
    out << "trigger_total=" << s.trigger_total << '\n';
    out << "meaningful_trigger_total=" << s.meaningful_triggers << '\n';
  }
}

}  // namespace dra
