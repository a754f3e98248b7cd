#include "dra/comms.hpp"

#include <string>

namespace dra {

namespace {

void check_shapes(const std::vector<NodeState>& states, const CommState& comm,
                  const WeightedDigraph& g_k) {
  const size_t n = comm.sampled.size();
  if (states.size() != n || static_cast<size_t>(g_k.n()) != n) {
    throw ConfigError("node count mismatch between states, comm layer, and graph");
  }
}

void check_schedule(const CommState& comm, long k) {
  if (k != comm.expected_k) {
    throw ConfigError("sampling call at index " + std::to_string(k) +
                      ", expected " + std::to_string(comm.expected_k) +
                      ": updates must arrive in grid order");
  }
}

}  // namespace

CommState CommState::make(Regime regime, double ts,
                          const std::vector<NodeState>& init) {
  if (regime != Regime::continuous && !(ts > 0.0)) {
    throw ConfigError("sampled regimes need a positive sampling period");
  }
  CommState c;
  c.regime = regime;
  c.ts = ts;
  c.trigger_log.resize(init.size());
  c.sampled.reserve(init.size());
  for (const auto& s : init) {
    c.sampled.push_back(s.lambda);
    c.held_u.push_back(Eigen::VectorXd::Zero(s.lambda.size()));
  }
  c.broadcast = c.sampled;
  return c;
}

void sample_and_hold(const std::vector<NodeState>& states, CommState& comm,
                     const WeightedDigraph& g_k, double beta, long k) {
  if (comm.regime != Regime::periodic) {
    throw ConfigError("sample_and_hold serves the periodic regime");
  }
  check_shapes(states, comm, g_k);
  check_schedule(comm, k);
  for (size_t i = 0; i < states.size(); ++i) comm.sampled[i] = states[i].lambda;
  comm.broadcast = comm.sampled;
  const double t = static_cast<double>(k) * comm.ts;
  for (int i = 0; i < g_k.n(); ++i) {
    comm.held_u[i] = coupling(comm.sampled, g_k, i, beta,
                              CouplingSource::sampled_states).u;
    comm.trigger_log[i].push_back({k, t, 0.0, 0.0});
  }
  comm.expected_k = k + 1;
}

std::vector<int> event_step(const std::vector<NodeState>& states, CommState& comm,
                            const WeightedDigraph& g_k, double beta,
                            const Eigen::VectorXd& coeff, long k) {
  if (comm.regime != Regime::event) {
    throw ConfigError("event_step serves the event regime");
  }
  check_shapes(states, comm, g_k);
  check_schedule(comm, k);
  if (coeff.size() != g_k.n() || (coeff.array() < 0.0).any()) {
    throw ConfigError("need one nonnegative trigger coefficient per node");
  }
  const int n = g_k.n();
  const double t = static_cast<double>(k) * comm.ts;
  std::vector<int> fired;
  // Decide all triggers against the broadcasts as they stood entering the
  // instant, then update; transmissions within one instant are simultaneous.
  std::vector<Eigen::VectorXd> next_broadcast = comm.broadcast;
  for (int i = 0; i < n; ++i) {
    comm.sampled[i] = states[i].lambda;
    const double err = (comm.sampled[i] - comm.broadcast[i]).squaredNorm();
    double spread = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = g_k.weight(i, j);
      if (w > 0.0) spread += w * (comm.broadcast[j] - comm.broadcast[i]).squaredNorm();
    }
    const double threshold = coeff(i) * spread;
    if (err >= threshold) {  // ties fire; a zero-error fire is idempotent
      next_broadcast[i] = comm.sampled[i];
      comm.trigger_log[i].push_back({k, t, err, threshold});
      fired.push_back(i);
    }
  }
  comm.broadcast = std::move(next_broadcast);
  for (int i = 0; i < n; ++i) {
    comm.held_u[i] = coupling(comm.broadcast, g_k, i, beta,
                              CouplingSource::broadcast_states).u;
  }
  comm.expected_k = k + 1;
  return fired;
}

void on_edge_change(CommState& comm, const WeightedDigraph& old_g,
                    const WeightedDigraph& new_g) {
  if (old_g.n() != new_g.n() ||
      static_cast<size_t>(new_g.n()) != comm.sampled.size()) {
    throw ConfigError("topology switch changes the node count");
  }
  // Broadcast vectors are shared state here: a node gaining an in-edge reads
  // the neighbor's last transmission at the next sampling instant without any
  // handshake, so there is nothing to refresh and nothing to log.
}

}  // namespace dra
