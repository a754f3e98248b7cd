#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dra/cli.hpp"

namespace fs = std::filesystem;

namespace {

// Scratch directory for scenario files and command outputs; removed on exit.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("dra_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    return p.string();
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Extracts the value of a "key=value" line; fails the test when absent.
std::string grab(const std::string& text, const std::string& key) {
  const std::string needle = key + "=";
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t eol = text.find('\n', pos);
    const std::string line = text.substr(pos, eol - pos);
    if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  FAIL("missing key '" << key << "' in output:\n" << text);
  return "";
}

double grabd(const std::string& text, const std::string& key) {
  return std::strtod(grab(text, key).c_str(), nullptr);
}

bool has_line_with(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += (c == '\n');
  return n;
}

// Three scalar-quadratic nodes on a directed ring; gains inside the
// distributed bound 1/32.
std::string trio_text(const std::string& comm, const std::string& sim,
                      double beta = 0.02) {
  std::ostringstream s;
  s << "[problem]\n"
       "m = 1\n"
       "node0.family = quadratic\n"
       "node0.q = 1\n"
       "node0.d = 1\n"
       "node0.l = 1\n"
       "node1.family = quadratic\n"
       "node1.q = 2\n"
       "node1.d = 2\n"
       "node1.l = 2\n"
       "node2.family = quadratic\n"
       "node2.q = 4\n"
       "node2.d = 3\n"
       "node2.l = 4\n"
       "[graph]\n"
       "n = 3\n"
       "segment0.start = 0\n"
       "segment0.weights = 0 0 1 1 0 0 0 1 0\n"
       "[gains]\n"
       "alpha = 1\n"
    << "beta = " << beta << "\n"
    << "[comm]\n"
    << comm << "[sim]\n"
    << sim;
  return s.str();
}

const char* kBuiltinText =
    "[problem]\n"
    "builtin = ten_node_default\n"
    "[graph]\n"
    "builtin = ten_node_default\n"
    "[gains]\n"
    "alpha = 1\n"
    "beta = 0.05\n"
    "[comm]\n"
    "regime = continuous\n"
    "[sim]\n"
    "horizon = 300\n"
    "dt = 0.001\n";

}  // namespace

TEST_CASE("design prints bounds and a valid certificate for the stock gains") {
  TempDir tmp;
  const std::string path = tmp.file("stock.ini", kBuiltinText);
  std::ostringstream out, err;
  const int rc = dra::cmd_design(path, out, err);
  CHECK(rc == dra::kExitOk);
  CHECK(err.str().empty());
  const std::string text = out.str();
  CHECK(grab(text, "nodes") == "10");
  CHECK(grab(text, "dimension") == "2");
  CHECK(grab(text, "regime") == "continuous");
  const double bound = grabd(text, "beta_bound_distributed");
  CHECK(bound > 0.102);
  CHECK(bound < 0.104);
  CHECK(grabd(text, "beta_bound_heuristic") ==
        doctest::Approx(0.0251382604).epsilon(1e-6));
  CHECK(grabd(text, "beta_bound_centralized") > 0.0);
  // Continuous regime: no sampled bound, ts reported as zero.
  CHECK_FALSE(has_line_with(text, "beta_bound_sampled="));
  CHECK(grab(text, "ts") == "0");
  CHECK(grab(text, "certificate_method") == "distributed-eq14");
  CHECK(grab(text, "certificate_valid") == "1");
  for (int i = 0; i < 10; ++i) {
    CHECK(grabd(text, "margin_node_" + std::to_string(i)) > 0.0);
  }
}

TEST_CASE("design flags gains above the bound with a dedicated exit code") {
  TempDir tmp;
  std::string text(kBuiltinText);
  const size_t pos = text.find("beta = 0.05");
  text.replace(pos, 11, "beta = 0.20");
  const std::string path = tmp.file("hot.ini", text);
  std::ostringstream out, err;
  const int rc = dra::cmd_design(path, out, err);
  CHECK(rc == dra::kExitCertificate);
  CHECK(grab(out.str(), "certificate_valid") == "0");
  double worst = 1.0;
  for (int i = 0; i < 10; ++i) {
    worst = std::min(worst, grabd(out.str(), "margin_node_" + std::to_string(i)));
  }
  CHECK(worst < 0.0);
}

TEST_CASE("design reports the sampled bound and supremum for periodic scenarios") {
  TempDir tmp;
  const std::string path = tmp.file(
      "trio.ini",
      trio_text("regime = periodic\nts = 0.5\n", "horizon = 1\ndt = 0.001\n"));
  std::ostringstream out, err;
  const int rc = dra::cmd_design(path, out, err);
  CHECK(rc == dra::kExitOk);
  const std::string text = out.str();
  // 1 / (2 (l^2 + ts l)) with the worst node l = 4: 1/36.
  CHECK(grabd(text, "beta_bound_sampled") == doctest::Approx(1.0 / 36.0).epsilon(1e-12));
  // (1/(2 beta din) - l^2) / l with beta = 0.02: node l=4 gives 2.25.
  CHECK(grabd(text, "ts_supremum") == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(grab(text, "certificate_method") == "sampled-eq19");
  CHECK(grab(text, "certificate_valid") == "1");
}

TEST_CASE("commands reject unreadable or malformed scenarios") {
  TempDir tmp;
  std::ostringstream out, err;
  CHECK(dra::cmd_design(tmp.sub("missing.ini"), out, err) == dra::kExitParse);
  CHECK(has_line_with(err.str(), "scenario error:"));
  CHECK(has_line_with(err.str(), "cannot read scenario file"));

  const std::string bad = tmp.file("bad.ini", "[problem]\nwhat now\n");
  std::ostringstream out2, err2;
  CHECK(dra::cmd_run(bad, tmp.sub("o"), out2, err2) == dra::kExitParse);
  CHECK(has_line_with(err2.str(), "scenario error: line 2:"));
  CHECK(has_line_with(err2.str(), "expected key = value"));
}

TEST_CASE("run writes reproducible CSV outputs") {
  TempDir tmp;
  const std::string path = tmp.file(
      "trio.ini",
      trio_text("regime = continuous\n", "horizon = 2\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out1, err1;
  REQUIRE(dra::cmd_run(path, tmp.sub("a"), out1, err1) == dra::kExitOk);
  CHECK(err1.str().empty());

  const std::string traj = slurp(fs::path(tmp.sub("a")) / "trajectory.csv");
  const std::string summary = slurp(fs::path(tmp.sub("a")) / "summary.txt");
  CHECK_FALSE(fs::exists(fs::path(tmp.sub("a")) / "events.csv"));

  // Exact header for one commodity, Unix line endings throughout.
  CHECK(traj.rfind("t,node,lambda_0,gamma_0,u_0,V,consensus_err,dual_residual,"
                   "dist_to_lstar\n", 0) == 0);
  CHECK(traj.find('\r') == std::string::npos);
  CHECK(summary.find('\r') == std::string::npos);
  // 2001 recorded steps, three nodes, one header line.
  CHECK(count_lines(traj) == 2001 * 3 + 1);

  // The summary is echoed to stdout verbatim.
  CHECK(out1.str() == summary);
  CHECK(grab(summary, "regime") == "continuous");
  CHECK(grab(summary, "n") == "3");
  CHECK(grab(summary, "aborted") == "0");
  CHECK(grab(summary, "seed") == "7");
  CHECK(grabd(summary, "lambda_star_0") == doctest::Approx(24.0 / 7.0).epsilon(1e-12));
  CHECK(grab(summary, "steps_recorded") == "2001");
  // Continuous regime: no trigger accounting, no sampled residual, no c.
  CHECK_FALSE(has_line_with(summary, "trigger_total="));
  CHECK_FALSE(has_line_with(summary, "ifp_residual_sampled_max="));
  CHECK_FALSE(has_line_with(summary, "\nc="));
  CHECK(summary.rfind("c=", 0) != 0);

  // A rerun is byte-identical.
  std::ostringstream out2, err2;
  REQUIRE(dra::cmd_run(path, tmp.sub("b"), out2, err2) == dra::kExitOk);
  CHECK(slurp(fs::path(tmp.sub("b")) / "trajectory.csv") == traj);
  CHECK(slurp(fs::path(tmp.sub("b")) / "summary.txt") == summary);
}

TEST_CASE("run records events and trigger counts in the event regime") {
  TempDir tmp;
  const std::string path = tmp.file(
      "ev.ini", trio_text("regime = event\nts = 0.25\nc = 0.5\n",
                          "horizon = 2\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out, err;
  REQUIRE(dra::cmd_run(path, tmp.sub("o"), out, err) == dra::kExitOk);
  const std::string events = slurp(fs::path(tmp.sub("o")) / "events.csv");
  CHECK(events.rfind("node,k,t,e_norm_sq,threshold\n", 0) == 0);
  const std::string summary = out.str();
  CHECK(grab(summary, "c") == "0.5");
  CHECK(grab(summary, "ts") == "0.25");
  CHECK(has_line_with(summary, "trigger_count_node_0="));
  CHECK(has_line_with(summary, "trigger_count_node_2="));
  const double total = grabd(summary, "trigger_total");
  CHECK(total > 0.0);
  // Each event line is one trigger.
  CHECK(count_lines(events) == static_cast<int>(total) + 1);
  CHECK(has_line_with(summary, "meaningful_trigger_total="));
  CHECK(has_line_with(summary, "ifp_residual_sampled_max="));
}

TEST_CASE("run surfaces a domain escape as an abort") {
  TempDir tmp;
  std::string text(kBuiltinText);
  size_t pos = text.find("beta = 0.05");
  text.replace(pos, 11, "beta = 0.50");
  pos = text.find("horizon = 300");
  text.replace(pos, 13, "horizon = 20");
  pos = text.find("dt = 0.001");
  text.replace(pos, 10, "dt = 0.002");
  const std::string path = tmp.file("hot.ini", text);
  std::ostringstream out, err;
  const int rc = dra::cmd_run(path, tmp.sub("o"), out, err);
  CHECK(rc == dra::kExitAbort);
  const std::string summary = out.str();
  CHECK(grab(summary, "aborted") == "1");
  CHECK(has_line_with(grab(summary, "abort_reason"), "domain"));
  // The truncated trajectory is still on disk.
  CHECK(fs::exists(fs::path(tmp.sub("o")) / "trajectory.csv"));
}

TEST_CASE("verify passes a well-gained continuous run") {
  TempDir tmp;
  const std::string path = tmp.file(
      "trio.ini",
      trio_text("regime = continuous\n", "horizon = 150\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out, err;
  const int rc = dra::cmd_verify(path, out, err);
  const std::string text = out.str();
  INFO(text);
  CHECK(rc == dra::kExitOk);
  CHECK(has_line_with(text, "result=PASS"));
  CHECK_FALSE(has_line_with(text, "status=FAIL"));
  for (const char* name :
       {"weight_balance_segment_0", "joint_strong_connectivity",
        "gamma_conservation", "ifp_residual_continuous", "z_gain",
        "positive_invariance", "equilibrium_stationarity", "oracle_convergence",
        "storage_monotonicity"}) {
    CHECK(has_line_with(text, std::string("check=") + name + " status=PASS"));
  }
  // Continuous regime: no sampled residual, no event spacing check.
  CHECK_FALSE(has_line_with(text, "check=ifp_residual_sampled"));
  CHECK_FALSE(has_line_with(text, "check=inter_event_spacing"));
}

TEST_CASE("verify stops at structural failures before simulating") {
  TempDir tmp;
  std::string text = trio_text("regime = continuous\n",
                               "horizon = 150\ndt = 0.001\nseed = 7\n");
  const size_t pos = text.find("0 0 1 1 0 0 0 1 0");
  text.replace(pos, 17, "0 0 2 1 0 0 0 1 0");
  const std::string path = tmp.file("lop.ini", text);
  std::ostringstream out, err;
  const int rc = dra::cmd_verify(path, out, err);
  CHECK(rc == dra::kExitProperty);
  const std::string got = out.str();
  CHECK(has_line_with(got, "check=weight_balance_segment_0 status=FAIL"));
  CHECK(has_line_with(got, "result=FAIL (structural checks failed before simulation)"));
  CHECK_FALSE(has_line_with(got, "gamma_conservation"));
}

TEST_CASE("verify skips convergence claims under an invalid certificate") {
  TempDir tmp;
  const std::string path = tmp.file(
      "hot.ini", trio_text("regime = continuous\n",
                           "horizon = 2\ndt = 0.001\nseed = 7\n", 0.1));
  std::ostringstream out, err;
  const int rc = dra::cmd_verify(path, out, err);
  const std::string text = out.str();
  INFO(text);
  CHECK(rc == dra::kExitOk);
  CHECK(grab(text, "certificate_valid") == "0");
  CHECK(has_line_with(text,
                      "check=oracle_convergence status=SKIP reason=invalid gain "
                      "certificate"));
  CHECK(has_line_with(text,
                      "check=storage_monotonicity status=SKIP reason=invalid gain "
                      "certificate"));
  CHECK(has_line_with(text, "check=gamma_conservation status=PASS"));
  CHECK(has_line_with(text, "result=PASS"));
}

TEST_CASE("verify checks event spacing and skips the storage check") {
  TempDir tmp;
  const std::string path = tmp.file(
      "ev.ini", trio_text("regime = event\nts = 0.25\nc = 0.5\n",
                          "horizon = 150\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out, err;
  const int rc = dra::cmd_verify(path, out, err);
  const std::string text = out.str();
  INFO(text);
  CHECK(rc == dra::kExitOk);
  CHECK(has_line_with(text, "check=inter_event_spacing status=PASS"));
  CHECK(has_line_with(text, "check=oracle_convergence status=PASS"));
  CHECK(has_line_with(
      text, "check=storage_monotonicity status=SKIP reason=event regime tracks a "
            "different Lyapunov function"));
}

TEST_CASE("sweep validates its parameter and values") {
  TempDir tmp;
  const std::string path = tmp.file(
      "trio.ini",
      trio_text("regime = continuous\n", "horizon = 1\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out, err;
  CHECK(dra::cmd_sweep(path, "gamma", {0.1}, 1, "", out, err) == dra::kExitParse);
  CHECK(has_line_with(err.str(), "sweep parameter must be beta, ts, or c"));
  std::ostringstream out2, err2;
  CHECK(dra::cmd_sweep(path, "beta", {}, 1, "", out2, err2) == dra::kExitParse);
  CHECK(has_line_with(err2.str(), "at least one value"));
}

TEST_CASE("sweep runs every value, records per-run failures, and writes sweep.csv") {
  TempDir tmp;
  const std::string path = tmp.file(
      "per.ini", trio_text("regime = periodic\nts = 0.25\n",
                           "horizon = 1\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out, err;
  // 0.0003 is not a multiple of dt, so that run fails while the others pass.
  const int rc = dra::cmd_sweep(path, "ts", {0.25, 0.0003, 0.5}, 1,
                                tmp.sub("sw"), out, err);
  CHECK(rc == dra::kExitOk);
  const std::string text = out.str();
  REQUIRE(count_lines(text) == 4);
  CHECK(text.rfind("param,value,status,terminal_consensus_err,terminal_dual_residual,"
                   "terminal_dist_to_lstar,conservation_max,trigger_total,reason\n",
                   0) == 0);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);  // header
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("ts,0.25,ok,", 0) == 0);
  CHECK(rows[1].rfind("ts,0.00029", 0) == 0);  // 0.0003 rendered with 17 digits
  CHECK(rows[1].find(",failed,") != std::string::npos);
  CHECK(rows[2].rfind("ts,0.5,ok,", 0) == 0);
  // Sanitized rows keep exactly eight commas each.
  for (const std::string& r : rows) {
    CHECK(std::count(r.begin(), r.end(), ',') == 8);
  }
  CHECK(slurp(fs::path(tmp.sub("sw")) / "sweep.csv") == text);
}

TEST_CASE("sweep output does not depend on the worker count") {
  TempDir tmp;
  const std::string path = tmp.file(
      "per.ini", trio_text("regime = periodic\nts = 0.25\n",
                           "horizon = 1\ndt = 0.001\nseed = 7\n"));
  std::ostringstream a, b, err;
  REQUIRE(dra::cmd_sweep(path, "beta", {0.01, 0.02, 0.03}, 1, "", a, err) ==
          dra::kExitOk);
  REQUIRE(dra::cmd_sweep(path, "beta", {0.01, 0.02, 0.03}, 2, "", b, err) ==
          dra::kExitOk);
  CHECK(a.str() == b.str());
}

TEST_CASE("sweep rejects the trigger scale outside the event regime per run") {
  TempDir tmp;
  const std::string path = tmp.file(
      "per.ini", trio_text("regime = periodic\nts = 0.25\n",
                           "horizon = 1\ndt = 0.001\nseed = 7\n"));
  std::ostringstream out, err;
  const int rc = dra::cmd_sweep(path, "c", {0.25, 0.5}, 1, "", out, err);
  CHECK(rc == dra::kExitOk);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  int failed = 0;
  while (std::getline(lines, line)) {
    if (line.find(",failed,") != std::string::npos) ++failed;
    CHECK(line.find("only applies to the event regime") != std::string::npos);
  }
  CHECK(failed == 2);
}
