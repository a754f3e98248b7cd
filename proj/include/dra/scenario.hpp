#pragma once

#include <string>
#include <vector>

#include "dra/engine.hpp"

namespace dra {

// Seed of the stock scenarios. Chosen so that the shipped gain settings
// reproduce both the convergent and the divergent regimes out of the box.
inline constexpr unsigned long long kDefaultSeed = 4;

// The stock ten-node, two-commodity allocation problem: six quadratic nodes
// and four with log-sum-exp coordinates, demands summing to 30.
std::vector<CostSpec> ten_node_costs();

// Stock scenario: the costs above on the alternating-cycle schedule,
// continuous regime, alpha = 1, beta = 0.05, 300 s at dt = 1e-3.
ScenarioConfig ten_node_default_config();

// Parses the INI-style scenario text (sections [problem], [graph], [gains],
// [comm], [sim]; see README). Unknown sections or keys are rejected. Throws
// ParseError anchored to the offending line.
ScenarioConfig parse_scenario(const std::string& text);

// Reads and parses a scenario file. Throws ConfigError when unreadable.
ScenarioConfig load_scenario_file(const std::string& path);

}  // namespace dra
