#include "dra/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long grid_index(double t, double dt, const char* what) {
  const long k = std::lround(t / dt);
  if (k < 0 || std::abs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw ConfigError(std::string(what) + " " + std::to_string(t) +
                      " is not on the integrator grid (dt = " + std::to_string(dt) + ")");
  }
  return k;
}

void validate_config(const ScenarioConfig& cfg) {
  const int n = static_cast<int>(cfg.costs.size());
  if (n < 1) throw ConfigError("scenario needs at least one node");
  if (cfg.schedule.n() != n) {
    throw ConfigError("schedule has " + std::to_string(cfg.schedule.n()) +
                      " nodes, costs define " + std::to_string(n));
  }
  const int m = cfg.costs.front().dim();
  for (int i = 0; i < n; ++i) {
    if (cfg.costs[i].dim() != m) {
      throw ConfigError("node " + std::to_string(i) + " has dimension " +
                        std::to_string(cfg.costs[i].dim()) + ", expected " +
                        std::to_string(m));
    }
  }
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) throw ConfigError("alpha must be positive");
  if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) throw ConfigError("beta must be positive");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    throw ConfigError("horizon must be positive");
  }
  if (cfg.schedule.horizon() < cfg.horizon - 1e-12) {
    throw ConfigError("graph schedule does not cover the simulation horizon");
  }
  if (cfg.x0) {
    if (static_cast<int>(cfg.x0->size()) != n) {
      throw ConfigError("x0 must provide one vector per node");
    }
    for (const auto& x : *cfg.x0) {
      if (x.size() != m) throw ConfigError("x0 entries must have the problem dimension");
    }
  }
}

// Uniform draw in [-2, 2] from the top 53 bits of the generator; identical
// across platforms for a given seed.
double draw_box(std::mt19937_64& rng) {
  const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return -2.0 + 4.0 * u01;
}

NodeState rk4_node(const NodeState& s, const Eigen::VectorXd& u, const CostSpec& cost,
                   double alpha, double dt) {
  auto dlam = [&](const Eigen::VectorXd& lam, const Eigen::VectorXd& gam) {
    return (-alpha * (cost.inverse_gradient(lam) - cost.demand()) - gam).eval();
  };
  // dgamma = -u is state-independent, so the gamma stages are affine in time
  // and RK4 reduces to the exact update gamma + dt * (-u).
  const Eigen::VectorXd k1 = dlam(s.lambda, s.gamma);
  const Eigen::VectorXd k2 =
      dlam(s.lambda + 0.5 * dt * k1, s.gamma - 0.5 * dt * u);
  const Eigen::VectorXd k3 =
      dlam(s.lambda + 0.5 * dt * k2, s.gamma - 0.5 * dt * u);
  const Eigen::VectorXd k4 = dlam(s.lambda + dt * k3, s.gamma - dt * u);
  NodeState out;
  out.lambda = s.lambda + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.gamma = s.gamma - dt * u;
  return out;
}

}  // namespace

std::vector<NodeState> initialize(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const int n = static_cast<int>(cfg.costs.size());
  const int m = cfg.costs.front().dim();
  std::vector<NodeState> states(n);
  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(m);
    if (cfg.x0) {
      x = (*cfg.x0)[i];
    } else {
      for (int c = 0; c < m; ++c) x(c) = draw_box(rng);
    }
    states[i].lambda = cfg.costs[i].gradient(x);
    states[i].gamma = Eigen::VectorXd::Zero(m);
  }
  return states;
}

void step(std::vector<NodeState>& states, const std::vector<Eigen::VectorXd>& u,
          const std::vector<CostSpec>& costs, double alpha, double dt) {
  if (states.size() != costs.size() || u.size() != costs.size()) {
    throw ConfigError("states, inputs, and costs must have one entry per node");
  }
  for (size_t i = 0; i < states.size(); ++i) {
    states[i] = rk4_node(states[i], u[i], costs[i], alpha, dt);
  }
}

OracleSolution solve_oracle(const std::vector<CostSpec>& costs, double alpha) {
  const int n = static_cast<int>(costs.size());
  if (n < 1) throw ConfigError("need at least one cost");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  const int m = costs.front().dim();
  for (const auto& c : costs) {
    if (c.dim() != m) throw ConfigError("costs must agree on the dimension");
  }

  // Intersection of the open dual domains.
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, -kInf);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(m, kInf);
  for (const auto& c : costs) {
    lo = lo.cwiseMax(c.domain_lo());
    hi = hi.cwiseMin(c.domain_hi());
  }
  Eigen::VectorXd pad(m);
  for (int j = 0; j < m; ++j) {
    if (!(lo(j) < hi(j))) throw ConfigError("dual domains have empty intersection");
    double scale = 1.0;
    if (lo(j) != -kInf) scale = std::max(scale, std::abs(lo(j)));
    if (hi(j) != kInf) scale = std::max(scale, std::abs(hi(j)));
    pad(j) = 1e-6 * scale;
  }
  auto clamp_interior = [&](Eigen::VectorXd v) {
    for (int j = 0; j < m; ++j) {
      if (lo(j) != -kInf) v(j) = std::max(v(j), lo(j) + pad(j));
      if (hi(j) != kInf) v(j) = std::min(v(j), hi(j) - pad(j));
    }
    return v;
  };

  auto residual = [&](const Eigen::VectorXd& lam) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
    for (const auto& c : costs) f += c.inverse_gradient(lam) - c.demand();
    return f;
  };

  // Start from the average marginal price of serving each demand locally.
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  for (const auto& c : costs) lam += c.gradient(c.demand());
  lam = clamp_interior(lam / static_cast<double>(n));

  Eigen::VectorXd f = residual(lam);
  bool converged = f.norm() <= kOracleTol;
  for (int it = 0; it < 100 && !converged; ++it) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (const auto& c : costs) jac += c.inverse_gradient_jacobian(lam);
    const Eigen::VectorXd dir = jac.ldlt().solve(-f);
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-14) {
      const Eigen::VectorXd cand = clamp_interior(lam + t * dir);
      try {
        const Eigen::VectorXd fc = residual(cand);
        if (fc.norm() <= (1.0 - 1e-4 * t) * f.norm() || fc.norm() <= kOracleTol) {
          lam = cand;
          f = fc;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
        // Candidate grazed the boundary: shrink.
      }
      t *= 0.5;
    }
    if (!accepted) break;
    converged = f.norm() <= kOracleTol;
  }

  if (!converged && m == 1) {
    // Scalar fallback: the residual is strictly increasing, so bisection on a
    // sign bracket always lands.
    double blo, bhi;
    if (lo(0) != -kInf && hi(0) != kInf) {
      blo = lo(0) + pad(0);
      bhi = hi(0) - pad(0);
    } else {
      blo = lam(0) - 1.0;
      bhi = lam(0) + 1.0;
      for (int it = 0; it < 200 && residual(Eigen::VectorXd::Constant(1, blo))(0) > 0.0; ++it) {
        bhi = blo;
        blo = (lo(0) == -kInf) ? blo * 2.0 - 1.0 : std::max(lo(0) + pad(0), blo * 2.0);
      }
      for (int it = 0; it < 200 && residual(Eigen::VectorXd::Constant(1, bhi))(0) < 0.0; ++it) {
        blo = bhi;
        bhi = (hi(0) == kInf) ? bhi * 2.0 + 1.0 : std::min(hi(0) - pad(0), bhi * 2.0);
      }
    }
    for (int it = 0; it < 2000 && !converged; ++it) {
      const double mid = 0.5 * (blo + bhi);
      lam(0) = mid;
      f = residual(lam);
      converged = f.norm() <= kOracleTol;
      if (f(0) > 0.0) {
        bhi = mid;
      } else {
        blo = mid;
      }
      if (bhi - blo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
    }
    f = residual(lam);
    converged = f.norm() <= kOracleTol;
  }
  if (!converged) {
    throw NumericError("optimum solver stalled at residual " + std::to_string(f.norm()));
  }

  OracleSolution sol;
  sol.lambda_star = lam;
  sol.residual = f.norm();
  sol.x_star.reserve(n);
  sol.gamma_star.reserve(n);
  for (const auto& c : costs) {
    Eigen::VectorXd x = c.inverse_gradient(lam);
    sol.gamma_star.push_back(-alpha * (x - c.demand()));
    sol.x_star.push_back(std::move(x));
  }
  return sol;
}

RunResult run(const ScenarioConfig& cfg, const RunOptions& opts) {
  validate_config(cfg);
  const int n = static_cast<int>(cfg.costs.size());
  const int m = cfg.costs.front().dim();
  const long nsteps = grid_index(cfg.horizon, cfg.dt, "horizon");
  if (nsteps < 1) throw ConfigError("horizon shorter than one step");

  long sps = 0;  // steps per sampling interval
  if (cfg.regime != Regime::continuous) {
    if (!(cfg.ts > 0.0)) throw ConfigError("sampled regimes need ts > 0");
    sps = std::lround(cfg.ts / cfg.dt);
    if (sps < 1 || std::abs(static_cast<double>(sps) * cfg.dt - cfg.ts) > 1e-9 * cfg.ts) {
      throw ConfigError("ts must be an exact integer multiple of dt");
    }
  }
  const auto& segments = cfg.schedule.segments();
  std::vector<long> seg_start(segments.size());
  for (size_t s = 0; s < segments.size(); ++s) {
    seg_start[s] = grid_index(segments[s].start, cfg.dt, "segment start");
  }

  Eigen::VectorXd l(n);
  for (int i = 0; i < n; ++i) l(i) = cfg.costs[i].lipschitz();

  RunResult result;
  result.oracle = solve_oracle(cfg.costs, cfg.alpha);
  result.certificate =
      sampling_admissible(l, cfg.schedule.max_in_degrees(), cfg.alpha, cfg.beta,
                          cfg.regime == Regime::continuous ? 0.0 : cfg.ts);
  if (cfg.regime == Regime::event) {
    if (!(cfg.c > 0.0) || !(cfg.c < 1.0)) {
      throw ConfigError("event regime needs a threshold scale 0 < c < 1");
    }
    if (!result.certificate.valid()) {
      throw ConfigError(
          "event regime requires a valid gain certificate; smallest margin is " +
          std::to_string(result.certificate.per_node_margin.minCoeff()));
    }
  }

  std::vector<NodeState> states = initialize(cfg);
  CommState comm = CommState::make(
      cfg.regime == Regime::continuous ? Regime::periodic : cfg.regime,
      cfg.regime == Regime::continuous ? cfg.dt : cfg.ts, states);

  Trajectory& traj = result.trajectory;
  traj.n = n;
  traj.m = m;
  traj.dt = cfg.dt;
  traj.ts = (cfg.regime == Regime::continuous) ? 0.0 : cfg.ts;
  traj.lambda_star = result.oracle.lambda_star;
  traj.gamma_star = result.oracle.gamma_star;
  traj.min_boundary_clearance = kInf;
  const size_t cap = static_cast<size_t>(nsteps + 1);
  traj.times.reserve(cap);
  traj.lambda.reserve(cap * n * m);
  traj.gamma.reserve(cap * n * m);
  traj.u.reserve(cap * n * m);
  traj.z.reserve(cap * n * m);
  traj.storage.reserve(cap * n);
  traj.consensus_err.reserve(cap);
  traj.dual_residual.reserve(cap);
  traj.dist_to_lstar.reserve(cap);

  // Per-node constants of the storage function.
  std::vector<double> j_star(n);
  std::vector<Eigen::VectorXd> grad_star(n);
  for (int i = 0; i < n; ++i) {
    const DualFunction dual(cfg.costs[i]);
    j_star[i] = dual.value(result.oracle.lambda_star);
    grad_star[i] = result.oracle.x_star[i] - cfg.costs[i].demand();
  }

  std::vector<Eigen::VectorXd> u_cur(n, Eigen::VectorXd::Zero(m));
  std::vector<Eigen::VectorXd> lam_view(n);
  Eigen::VectorXd trig_coeff = Eigen::VectorXd::Zero(n);
  size_t cur_seg = 0;
  size_t comm_seg = 0;

  auto record = [&](long ks) {
    const double t = static_cast<double>(ks) * cfg.dt;
    traj.times.push_back(t);
    double consensus = 0.0, dist = 0.0;
    Eigen::VectorXd excess = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
      const CostSpec& cost = cfg.costs[i];
      const Eigen::VectorXd& lam = states[i].lambda;
      const Eigen::VectorXd& gam = states[i].gamma;
      const Eigen::VectorXd h = cost.inverse_gradient(lam);  // throws on domain exit
      const Eigen::VectorXd z = -cfg.alpha * (h - cost.demand()) - gam;
      const Eigen::VectorXd dlam = lam - result.oracle.lambda_star;
      const double j_here = -(cost.value(h) + lam.dot(cost.demand() - h));
      const double v = (cost.lipschitz() / cfg.alpha) * z.squaredNorm() -
                       dlam.dot(gam - result.oracle.gamma_star[i]) +
                       cfg.alpha * (j_star[i] - j_here + grad_star[i].dot(dlam));
      for (int c = 0; c < m; ++c) {
        traj.lambda.push_back(lam(c));
        traj.gamma.push_back(gam(c));
        traj.u.push_back(u_cur[i](c));
        traj.z.push_back(z(c));
      }
      traj.storage.push_back(v);
      excess += h - cost.demand();
      dist = std::max(dist, dlam.norm());
      traj.min_boundary_clearance =
          std::min(traj.min_boundary_clearance, cost.boundary_clearance(lam));
      for (int j = 0; j < i; ++j) {
        consensus = std::max(consensus, (lam - states[j].lambda).norm());
      }
    }
    traj.consensus_err.push_back(consensus);
    traj.dual_residual.push_back(excess.norm());
    traj.dist_to_lstar.push_back(dist);
  };

  for (long ks = 0; ks <= nsteps; ++ks) {
    const bool final_row = (ks == nsteps);
    if (!final_row) {
      while (cur_seg + 1 < segments.size() && seg_start[cur_seg + 1] <= ks) ++cur_seg;
      const WeightedDigraph& g = segments[cur_seg].graph;
      if (cfg.regime == Regime::continuous) {
        for (int i = 0; i < n; ++i) lam_view[i] = states[i].lambda;
        for (int i = 0; i < n; ++i) u_cur[i] = coupling(lam_view, g, i, cfg.beta).u;
      } else if (ks % sps == 0) {
        if (cur_seg != comm_seg) {
          on_edge_change(comm, segments[comm_seg].graph, g);
          comm_seg = cur_seg;
        }
        const long k = ks / sps;
        if (cfg.regime == Regime::periodic) {
          sample_and_hold(states, comm, g, cfg.beta, k);
        } else {
          if (opts.force_zero_trigger_coefficient) {
            trig_coeff.setZero();
          } else {
            const Eigen::VectorXd din = g.in_degrees();
            for (int i = 0; i < n; ++i) {
              trig_coeff(i) = trigger_coefficient(l(i), din(i), cfg.alpha, cfg.beta,
                                                  cfg.ts, cfg.c);
            }
          }
          event_step(states, comm, g, cfg.beta, trig_coeff, k);
        }
        u_cur = comm.held_u;
      }
    }
    try {
      record(ks);
      if (!final_row) {
        for (int i = 0; i < n; ++i) {
          states[i] = rk4_node(states[i], u_cur[i], cfg.costs[i], cfg.alpha, cfg.dt);
        }
      }
    } catch (const DomainError& e) {
      traj.aborted = true;
      traj.abort_reason = "dual iterate left its domain near t = " +
                          std::to_string(static_cast<double>(ks) * cfg.dt) + ": " +
                          e.what();
      break;
    }
  }

  if (cfg.regime == Regime::continuous) {
    traj.trigger_log.resize(n);
  } else {
    traj.trigger_log = std::move(comm.trigger_log);
  }
  return result;
}

Summary metrics(const Trajectory& traj, const OracleSolution& oracle,
                const std::vector<CostSpec>& costs, double alpha) {
  if (traj.steps() < 1) throw ConfigError("empty trajectory");
  if (static_cast<int>(costs.size()) != traj.n) {
    throw ConfigError("costs must match the trajectory node count");
  }
  Summary s;
  const size_t last = traj.steps() - 1;
  const int n = traj.n, m = traj.m;

  s.terminal_consensus_err = traj.consensus_err[last];
  s.terminal_dual_residual = traj.dual_residual[last];
  s.terminal_primal_feasibility = traj.dual_residual[last];
  s.terminal_dist_to_lstar = traj.dist_to_lstar[last];
  s.terminal_node_dist.resize(n);
  for (int i = 0; i < n; ++i) {
    s.terminal_node_dist(i) = (traj.lambda_at(last, i) - oracle.lambda_star).norm();
  }

  s.conservation_max = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd base = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) base += traj.gamma_at(0, i);
  for (size_t st = 0; st <= last; ++st) {
    Eigen::VectorXd tot = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) tot += traj.gamma_at(st, i);
    s.conservation_max = s.conservation_max.cwiseMax((tot - base).cwiseAbs());
  }
  s.conservation_max_abs = s.conservation_max.maxCoeff();

  s.trigger_counts.assign(n, 0);
  for (int i = 0; i < static_cast<int>(traj.trigger_log.size()); ++i) {
    s.trigger_counts[i] = static_cast<long>(traj.trigger_log[i].size());
    s.trigger_total += s.trigger_counts[i];
    for (const auto& ev : traj.trigger_log[i]) {
      if (ev.e_norm_sq > 0.0) ++s.meaningful_triggers;
    }
  }

  s.min_boundary_clearance = traj.min_boundary_clearance;
  s.aborted = traj.aborted;
  s.abort_reason = traj.abort_reason;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.ifp_residual_continuous_max = nan;
  s.ifp_residual_sampled_max = nan;
  s.z_gain_violation_max = nan;
  s.storage_total_max_increase = nan;
  if (traj.steps() >= 2) {
    double ifp_c = -kInf, zg = -kInf;
    for (int i = 0; i < n; ++i) {
      ifp_c = std::max(ifp_c, ifp_residual_continuous(traj, i, costs[i].lipschitz(), alpha));
      zg = std::max(zg, z_gain_check(traj, i, costs[i].lipschitz(), alpha));
    }
    s.ifp_residual_continuous_max = ifp_c;
    s.z_gain_violation_max = zg;
    const long stride = (traj.ts > 0.0) ? std::lround(traj.ts / traj.dt) : 1;
    if (traj.ts > 0.0 && last >= static_cast<size_t>(stride)) {
      double ifp_s = -kInf;
      for (int i = 0; i < n; ++i) {
        ifp_s = std::max(ifp_s,
                         ifp_residual_sampled(traj, i, costs[i].lipschitz(), alpha, traj.ts));
      }
      s.ifp_residual_sampled_max = ifp_s;
    }
    // Checkpoint totals of the storage (Vbar totals in sampled regimes).
    double worst = -kInf, prev = 0.0;
    bool have_prev = false;
    for (size_t st = 0; st <= last; st += static_cast<size_t>(stride)) {
      double tot = 0.0;
      for (int i = 0; i < n; ++i) {
        double v = traj.storage_at(st, i);
        if (traj.ts > 0.0) {
          v = (v + 0.5 * traj.ts * traj.z_at(st, i).squaredNorm()) / traj.ts;
        }
        tot += v;
      }
      if (have_prev) worst = std::max(worst, tot - prev);
      prev = tot;
      have_prev = true;
    }
    s.storage_total_max_increase = worst;
  }
  return s;
}

}  // namespace dra
