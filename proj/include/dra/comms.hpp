#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dra/dynamics.hpp"
#include "dra/graph.hpp"
#include "dra/trajectory.hpp"

namespace dra {

enum class Regime { continuous, periodic, event };

// Communication-layer state, mutated only at sampling instants t = k Ts.
struct CommState {
  Regime regime = Regime::periodic;
  double ts = 0.0;
  std::vector<Eigen::VectorXd> sampled;    // last sampled own states
  std::vector<Eigen::VectorXd> broadcast;  // last transmitted states (event regime)
  std::vector<Eigen::VectorXd> held_u;     // inputs held until the next instant
  std::vector<std::vector<TriggerEvent>> trigger_log;
  long expected_k = 0;  // next admissible sampling index

  // Builds the layer at t = 0. The event regime starts from a free initial
  // broadcast of every state, which is not logged as a trigger.
  static CommState make(Regime regime, double ts, const std::vector<NodeState>& init);
};

// Periodic exchange at sampling index k: samples every state, recomputes the
// held inputs from the sampled values, and logs one (zero-error) event per
// node so trigger counts reflect actual transmissions. Calls must arrive in
// grid order; anything else is a scheduling error.
void sample_and_hold(const std::vector<NodeState>& states, CommState& comm,
                     const WeightedDigraph& g_k, double beta, long k);

// Event-triggered exchange at sampling index k. Every node samples its state;
// node i retransmits when its hold error against the neighborhood spread
// satisfies ||e_i||^2 >= coeff_i * sum_j a_ij ||bh_j - bh_i||^2, evaluated on
// the broadcasts before any update (ties fire). Held inputs are then rebuilt
// from the updated broadcasts. Returns the indices that fired.
std::vector<int> event_step(const std::vector<NodeState>& states, CommState& comm,
                            const WeightedDigraph& g_k, double beta,
                            const Eigen::VectorXd& coeff, long k);

// Hook for topology switches between sampling instants. Broadcast views are
// globally consistent here, so establishing an edge needs no state transfer;
// the held inputs pick the change up at the next sampling instant. Never logs
// triggers.
void on_edge_change(CommState& comm, const WeightedDigraph& old_g,
                    const WeightedDigraph& new_g);

}  // namespace dra
