#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dra {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;        // scenario unreadable or invalid
inline constexpr int kExitCertificate = 3;  // design found invalid gains
inline constexpr int kExitProperty = 4;     // a verified property failed
inline constexpr int kExitAbort = 5;        // simulation aborted at runtime

// Prints every gain bound (centralized, distributed, sampled, heuristic), the
// sampling-period supremum, and the per-node margins for the scenario's
// gains. Returns kExitCertificate when any margin is nonpositive.
int cmd_design(const std::string& scenario_path, std::ostream& out, std::ostream& err);

// Runs the scenario and writes trajectory.csv, summary.txt, and (event
// regime) events.csv into out_dir. Reruns are byte-identical. Returns
// kExitAbort when the simulation left its domain; the summary still records
// the failure.
int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::ostream& out, std::ostream& err);

// Structural checks before simulation (weight balance, joint connectivity),
// then runtime properties (conservation, passivity residuals, invariance,
// event spacing, convergence, storage monotonicity) with measured values and
// thresholds. Convergence and monotonicity are skipped under an invalid
// certificate. Returns kExitProperty on any failed check.
int cmd_verify(const std::string& scenario_path, std::ostream& out, std::ostream& err);

// Repeats the scenario over the given values of one parameter (beta | ts |
// c), sharing the seed. Per-run failures are recorded and the sweep
// continues. workers > 1 runs values concurrently.
int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<double>& values, int workers,
              const std::string& out_dir, std::ostream& out, std::ostream& err);

}  // namespace dra
