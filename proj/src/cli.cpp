#include "dra/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "dra/report.hpp"
#include "dra/scenario.hpp"

namespace dra {

namespace {

bool load(const std::string& path, ScenarioConfig** out, std::ostream& err,
          std::optional<ScenarioConfig>& holder) {
  try {
    holder.emplace(load_scenario_file(path));
    *out = &*holder;
    return true;
  } catch (const ParseError& e) {
    err << "scenario error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "scenario error: " << e.what() << '\n';
  }
  return false;
}

Eigen::VectorXd curvatures(const ScenarioConfig& cfg) {
  Eigen::VectorXd l(cfg.costs.size());
  for (size_t i = 0; i < cfg.costs.size(); ++i) l(i) = cfg.costs[i].lipschitz();
  return l;
}

struct CheckLog {
  std::ostream& out;
  bool any_fail = false;

  void item(const std::string& name, bool pass, double measured, double threshold,
            const char* relation) {
    out << "check=" << name << " status=" << (pass ? "PASS" : "FAIL")
        << " measured=" << fmt17(measured) << " threshold" << relation
        << fmt17(threshold) << '\n';
    if (!pass) any_fail = true;
  }
  void skip(const std::string& name, const std::string& why) {
    out << "check=" << name << " status=SKIP reason=" << why << '\n';
  }
};

std::string sanitize_csv_field(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

}  // namespace

int cmd_design(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  std::optional<ScenarioConfig> holder;
  ScenarioConfig* cfg;
  if (!load(scenario_path, &cfg, err, holder)) return kExitParse;

  const Eigen::VectorXd l = curvatures(*cfg);
  const Eigen::VectorXd din = cfg->schedule.max_in_degrees();
  const double ts_eff = (cfg->regime == Regime::continuous) ? 0.0 : cfg->ts;

  GainCertificate cert;
  try {
    cert = sampling_admissible(l, din, cfg->alpha, cfg->beta, ts_eff);
    out << "nodes=" << cfg->costs.size() << '\n';
    out << "dimension=" << cfg->costs.front().dim() << '\n';
    out << "regime=" << regime_name(cfg->regime) << '\n';
    out << "alpha=" << fmt17(cfg->alpha) << '\n';
    out << "beta=" << fmt17(cfg->beta) << '\n';
    out << "ts=" << fmt17(ts_eff) << '\n';
    out << "beta_bound_centralized=" << fmt17(beta_bound_centralized(cfg->schedule, l, cfg->alpha))
        << '\n';
    out << "beta_bound_distributed=" << fmt17(beta_bound_distributed(l, din, cfg->alpha))
        << '\n';
    if (ts_eff > 0.0) {
      out << "beta_bound_sampled=" << fmt17(beta_bound_sampled(l, din, cfg->alpha, ts_eff))
          << '\n';
    }
    // Degree-free rule of thumb; scales with max l, not l^2 (see README).
    out << "beta_bound_heuristic=" << fmt17(beta_bound_heuristic(
               l, static_cast<int>(cfg->costs.size()), cfg->alpha))
        << '\n';
    out << "ts_supremum=" << fmt17(cert.ts_supremum) << '\n';
    for (int i = 0; i < cert.per_node_margin.size(); ++i) {
      out << "margin_node_" << i << '=' << fmt17(cert.per_node_margin(i)) << '\n';
    }
    out << "certificate_method=" << cert.method << '\n';
    out << "certificate_valid=" << (cert.valid() ? 1 : 0) << '\n';
  } catch (const ConfigError& e) {
    err << "design error: " << e.what() << '\n';
    return kExitParse;
  }
  return cert.valid() ? kExitOk : kExitCertificate;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::ostream& out, std::ostream& err) {
  std::optional<ScenarioConfig> holder;
  ScenarioConfig* cfg;
  if (!load(scenario_path, &cfg, err, holder)) return kExitParse;

  RunResult result;
  try {
    result = run(*cfg);
  } catch (const ConfigError& e) {
    err << "run error: " << e.what() << '\n';
    return kExitParse;
  } catch (const NumericError& e) {
    err << "run error: " << e.what() << '\n';
    return kExitAbort;
  }
  const Summary s = metrics(result.trajectory, result.oracle, cfg->costs, cfg->alpha);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    err << "cannot create output directory '" << out_dir << "': " << ec.message() << '\n';
    return kExitParse;
  }
  {
    std::ofstream f(fs::path(out_dir) / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(f, result.trajectory);
  }
  if (cfg->regime == Regime::event) {
    std::ofstream f(fs::path(out_dir) / "events.csv", std::ios::binary);
    write_events_csv(f, result.trajectory);
  }
  {
    std::ofstream f(fs::path(out_dir) / "summary.txt", std::ios::binary);
    write_summary(f, *cfg, result, s);
  }
  write_summary(out, *cfg, result, s);
  return s.aborted ? kExitAbort : kExitOk;
}

int cmd_verify(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  std::optional<ScenarioConfig> holder;
  ScenarioConfig* cfg;
  if (!load(scenario_path, &cfg, err, holder)) return kExitParse;

  CheckLog log{out};
  // Structural checks come first; a broken balance assumption invalidates the
  // whole analysis, so nothing is simulated past a failure here.
  for (size_t k = 0; k < cfg->schedule.segments().size(); ++k) {
    const auto rep = is_weight_balanced(cfg->schedule.segments()[k].graph);
    log.item("weight_balance_segment_" + std::to_string(k), rep.balanced,
             rep.imbalance.cwiseAbs().maxCoeff(), 1e-9, "<=");
  }
  const double window_end = std::min(cfg->horizon, cfg->schedule.horizon());
  const bool connected = union_strongly_connected(cfg->schedule, 0.0, window_end);
  log.item("joint_strong_connectivity", connected, connected ? 1.0 : 0.0, 1.0, ">=");
  if (log.any_fail) {
    out << "result=FAIL (structural checks failed before simulation)\n";
    return kExitProperty;
  }

  RunResult result;
  try {
    result = run(*cfg);
  } catch (const ConfigError& e) {
    err << "run error: " << e.what() << '\n';
    return kExitParse;
  } catch (const NumericError& e) {
    err << "run error: " << e.what() << '\n';
    return kExitAbort;
  }
  const Trajectory& traj = result.trajectory;
  const Summary s = metrics(traj, result.oracle, cfg->costs, cfg->alpha);
  const bool cert_valid = result.certificate.valid();
  out << "certificate_method=" << result.certificate.method << '\n';
  out << "certificate_valid=" << (cert_valid ? 1 : 0) << '\n';
  if (s.aborted) {
    out << "aborted=1\n";
    out << "abort_reason=" << s.abort_reason << '\n';
    out << "result=ABORT\n";
    return kExitAbort;
  }

  log.item("gamma_conservation", s.conservation_max_abs <= 1e-9,
           s.conservation_max_abs, 1e-9, "<=");
  log.item("ifp_residual_continuous", s.ifp_residual_continuous_max <= 1e-6,
           s.ifp_residual_continuous_max, 1e-6, "<=");
  if (traj.ts > 0.0 && std::isfinite(s.ifp_residual_sampled_max)) {
    log.item("ifp_residual_sampled", s.ifp_residual_sampled_max <= 1e-5,
             s.ifp_residual_sampled_max, 1e-5, "<=");
  }
  log.item("z_gain", s.z_gain_violation_max <= 1e-6, s.z_gain_violation_max, 1e-6, "<=");
  log.item("positive_invariance", s.min_boundary_clearance > 0.0,
           s.min_boundary_clearance, 0.0, ">");

  double rhs_worst = 0.0;
  for (size_t i = 0; i < cfg->costs.size(); ++i) {
    NodeState eq{result.oracle.lambda_star, result.oracle.gamma_star[i]};
    const auto d = node_rhs(eq, Eigen::VectorXd::Zero(traj.m), cfg->costs[i], cfg->alpha);
    rhs_worst = std::max(rhs_worst, std::max(d.dlambda.norm(), d.dgamma.norm()));
  }
  log.item("equilibrium_stationarity", rhs_worst <= 1e-10, rhs_worst, 1e-10, "<=");

  if (cfg->regime == Regime::event) {
    // Inter-event spacing: consecutive triggers of one node must sit on
    // distinct sampling instants, i.e. at least ts apart on the grid.
    long min_gap = std::numeric_limits<long>::max();
    bool on_grid = true;
    for (const auto& events : traj.trigger_log) {
      for (size_t e = 0; e < events.size(); ++e) {
        if (events[e].t != static_cast<double>(events[e].k) * cfg->ts) on_grid = false;
        if (e > 0) min_gap = std::min(min_gap, events[e].k - events[e - 1].k);
      }
    }
    const bool spacing_ok = on_grid && min_gap >= 1;
    log.item("inter_event_spacing", spacing_ok,
             min_gap == std::numeric_limits<long>::max()
                 ? 1.0
                 : static_cast<double>(min_gap) * cfg->ts,
             cfg->ts, ">=");
  }

  if (cert_valid) {
    const double conv_tol = (cfg->regime == Regime::continuous) ? 2e-2 : 5e-2;
    log.item("oracle_convergence", s.terminal_dist_to_lstar <= conv_tol,
             s.terminal_dist_to_lstar, conv_tol, "<=");
    if (cfg->regime != Regime::event) {
      log.item("storage_monotonicity", s.storage_total_max_increase <= 1e-6,
               s.storage_total_max_increase, 1e-6, "<=");
    } else {
      log.skip("storage_monotonicity", "event regime tracks a different Lyapunov function");
    }
  } else {
    log.skip("oracle_convergence", "invalid gain certificate");
    log.skip("storage_monotonicity", "invalid gain certificate");
  }

  out << "result=" << (log.any_fail ? "FAIL" : "PASS") << '\n';
  return log.any_fail ? kExitProperty : kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<double>& values, int workers,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  if (param != "beta" && param != "ts" && param != "c") {
    err << "sweep parameter must be beta, ts, or c\n";
    return kExitParse;
  }
  if (values.empty()) {
    err << "sweep needs at least one value\n";
    return kExitParse;
  }
  std::optional<ScenarioConfig> holder;
  ScenarioConfig* base;
  if (!load(scenario_path, &base, err, holder)) return kExitParse;

  struct Row {
    std::string status = "failed";
    std::string reason;
    Summary summary;
    bool have_summary = false;
  };
  std::vector<Row> rows(values.size());

  auto run_one = [&](size_t idx) {
    Row& row = rows[idx];
    try {
      ScenarioConfig cfg = *base;
      if (param == "beta") {
        cfg.beta = values[idx];
      } else if (param == "ts") {
        if (cfg.regime == Regime::continuous) {
          throw ConfigError("the continuous regime has no sampling period to sweep");
        }
        cfg.ts = values[idx];
      } else {
        if (cfg.regime != Regime::event) {
          throw ConfigError("trigger scale c only applies to the event regime");
        }
        cfg.c = values[idx];
      }
      const RunResult result = run(cfg);
      row.summary = metrics(result.trajectory, result.oracle, cfg.costs, cfg.alpha);
      row.have_summary = true;
      row.status = row.summary.aborted ? "aborted" : "ok";
      row.reason = row.summary.abort_reason;
    } catch (const std::exception& e) {
      row.status = "failed";
      row.reason = e.what();
    }
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    for (size_t i = 0; i < values.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    const size_t count = std::min<size_t>(workers, values.size());
    pool.reserve(count);
    for (size_t w = 0; w < count; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::ostringstream csv;
  csv << "param,value,status,terminal_consensus_err,terminal_dual_residual,"
         "terminal_dist_to_lstar,conservation_max,trigger_total,reason\n";
  for (size_t i = 0; i < values.size(); ++i) {
    const Row& row = rows[i];
    csv << param << ',' << fmt17(values[i]) << ',' << row.status << ',';
    if (row.have_summary) {
      csv << fmt17(row.summary.terminal_consensus_err) << ','
          << fmt17(row.summary.terminal_dual_residual) << ','
          << fmt17(row.summary.terminal_dist_to_lstar) << ','
          << fmt17(row.summary.conservation_max_abs) << ',' << row.summary.trigger_total;
    } else {
      csv << ",,,,";
    }
    csv << ',' << sanitize_csv_field(row.reason) << '\n';
  }
  out << csv.str();

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      err << "cannot create output directory '" << out_dir << "': " << ec.message() << '\n';
      return kExitParse;
    }
    std::ofstream f(fs::path(out_dir) / "sweep.csv", std::ios::binary);
    f << csv.str();
  }
  return kExitOk;
}

}  // namespace dra
