#include "dra/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace dra {

std::vector<CostSpec> ten_node_costs() {
  std::vector<CostSpec> costs;
  costs.reserve(10);
  Eigen::MatrixXd qa(2, 2), qb(2, 2), qc(2, 2);
  qa << 2.0, 0.5, 0.5, 1.0;
  qb << 0.5, 0.0, 0.0, 2.0;
  qc << 1.0, -0.5, -0.5, 2.0;
  const Eigen::Vector2d zero2(0.0, 0.0);
  const Eigen::Vector2d ba(1.0, 0.0);
  const Eigen::Vector2d d_small(1.0, 1.0);
  const Eigen::Vector2d d_large(2.0, 2.0);

  costs.push_back(CostSpec::quadratic(qa, zero2, 1.0, d_small, 2.21));
  costs.push_back(CostSpec::quadratic(qa, zero2, 1.0, d_small, 2.21));
  costs.push_back(CostSpec::quadratic(qb, ba, 1.0, d_small, 2.0));
  costs.push_back(CostSpec::quadratic(qb, ba, 1.0, d_small, 2.0));
  costs.push_back(CostSpec::quadratic(qc, zero2, 0.0, d_small, 2.21));
  costs.push_back(CostSpec::quadratic(qc, zero2, 0.0, d_large, 2.21));

  const std::vector<SeparableCoord> soft_plus = {LseCoord{{2.0, 0.0}},
                                                 QuadCoord{2.0, 0.0}};
  const std::vector<SeparableCoord> double_lse = {LseCoord{{2.0, -0.2}},
                                                  LseCoord{{1.0, 0.0}}};
  costs.push_back(CostSpec::separable(soft_plus, 0.0, d_large, 2.0));
  costs.push_back(CostSpec::separable(soft_plus, 0.0, d_large, 2.0));
  costs.push_back(CostSpec::separable(double_lse, 0.0, d_large, 1.21));
  costs.push_back(CostSpec::separable(double_lse, 0.0, d_large, 1.21));
  return costs;
}

ScenarioConfig ten_node_default_config() {
  ScenarioConfig cfg(ten_node_costs(), default_ten_node_schedule(300.0));
  cfg.alpha = 1.0;
  cfg.beta = 0.05;
  cfg.regime = Regime::continuous;
  cfg.ts = 0.0;
  cfg.c = 0.0;
  cfg.horizon = 300.0;
  cfg.dt = 1e-3;
  cfg.seed = kDefaultSeed;
  return cfg;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct KV {
  int line = 0;
  std::string value;
  mutable bool used = false;
};

struct SectionData {
  int line = 0;
  std::map<std::string, KV> kv;
  bool visited = false;
};

using Sections = std::map<std::string, SectionData>;

Sections tokenize(const std::string& text) {
  Sections out;
  std::istringstream in(text);
  std::string raw, cur;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "unterminated section header");
      cur = trim(s.substr(1, s.size() - 2));
      if (cur.empty()) throw ParseError(line, "empty section name");
      if (out.count(cur)) throw ParseError(line, "duplicate section [" + cur + "]");
      out[cur].line = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    if (cur.empty()) throw ParseError(line, "key outside any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "empty key");
    auto& sec = out[cur];
    if (sec.kv.count(key)) throw ParseError(line, "duplicate key '" + key + "'");
    sec.kv[key] = KV{line, val, false};
  }
  return out;
}

double to_double(const KV& kv, const std::string& key) {
  const char* s = kv.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *trim(end).c_str() != '\0' || !std::isfinite(v)) {
    throw ParseError(kv.line, "key '" + key + "': expected a number, got '" +
                                  kv.value + "'");
  }
  return v;
}

unsigned long long to_seed(const KV& kv, const std::string& key) {
  const char* s = kv.value.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *trim(end).c_str() != '\0' || errno == ERANGE) {
    throw ParseError(kv.line, "key '" + key + "': expected a nonnegative integer");
  }
  return v;
}

std::vector<double> to_doubles(const KV& kv, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(kv.value);
  std::string tok;
  while (in >> tok) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !std::isfinite(v)) {
      throw ParseError(kv.line, "key '" + key + "': '" + tok + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(kv.line, "key '" + key + "': expected numbers");
  return out;
}

Eigen::VectorXd to_vector(const KV& kv, const std::string& key, int size) {
  const auto vals = to_doubles(kv, key);
  if (static_cast<int>(vals.size()) != size) {
    throw ParseError(kv.line, "key '" + key + "': expected " + std::to_string(size) +
                                  " numbers, got " + std::to_string(vals.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), size);
}

// Access wrapper that tracks which keys were consumed.
class Ctx {
 public:
  explicit Ctx(Sections& secs) : secs_(secs) {}

  SectionData& need_section(const std::string& name) {
    auto it = secs_.find(name);
    if (it == secs_.end()) throw ParseError(0, "missing [" + name + "] section");
    it->second.visited = true;
    return it->second;
  }

  const KV* find(SectionData& sec, const std::string& key) const {
    auto it = sec.kv.find(key);
    if (it == sec.kv.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const KV& need(SectionData& sec, const std::string& sec_name,
                 const std::string& key) const {
    const KV* kv = find(sec, key);
    if (!kv) {
      throw ParseError(sec.line, "missing key '" + key + "' in [" + sec_name + "]");
    }
    return *kv;
  }

  void finish() const {
    int line = 0;
    std::string msg;
    for (const auto& [name, sec] : secs_) {
      if (!sec.visited && (line == 0 || sec.line < line)) {
        line = sec.line;
        msg = "unknown section [" + name + "]";
      }
      for (const auto& [key, kv] : sec.kv) {
        if (sec.visited && !kv.used && (line == 0 || kv.line < line)) {
          line = kv.line;
          msg = "unknown key '" + key + "' in [" + name + "]";
        }
      }
    }
    if (line > 0) throw ParseError(line, msg);
  }

 private:
  Sections& secs_;
};

std::vector<CostSpec> build_costs(Ctx& ctx, SectionData& sec) {
  if (const KV* builtin = ctx.find(sec, "builtin")) {
    if (builtin->value != "ten_node_default") {
      throw ParseError(builtin->line, "unknown builtin problem '" + builtin->value + "'");
    }
    return ten_node_costs();
  }
  const int m = static_cast<int>(to_double(ctx.need(sec, "problem", "m"), "m"));
  if (m < 1 || m > 64) throw ParseError(sec.line, "dimension m must be in [1, 64]");
  std::vector<CostSpec> costs;
  for (int i = 0;; ++i) {
    const std::string prefix = "node" + std::to_string(i) + ".";
    const KV* family = ctx.find(sec, prefix + "family");
    if (!family) {
      if (i == 0) throw ParseError(sec.line, "no node definitions in [problem]");
      break;
    }
    const Eigen::VectorXd d =
        to_vector(ctx.need(sec, "problem", prefix + "d"), prefix + "d", m);
    const double l = to_double(ctx.need(sec, "problem", prefix + "l"), prefix + "l");
    double cshift = 0.0;
    if (const KV* ckv = ctx.find(sec, prefix + "c")) cshift = to_double(*ckv, prefix + "c");
    try {
      if (family->value == "quadratic") {
        const auto qvals =
            to_doubles(ctx.need(sec, "problem", prefix + "q"), prefix + "q");
        if (static_cast<int>(qvals.size()) != m * m) {
          throw ParseError(family->line, "key '" + prefix + "q': expected " +
                                             std::to_string(m * m) + " numbers");
        }
        const Eigen::MatrixXd q = Eigen::Map<
            const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            qvals.data(), m, m);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        if (const KV* bkv = ctx.find(sec, prefix + "b")) b = to_vector(*bkv, prefix + "b", m);
        costs.push_back(CostSpec::quadratic(q, b, cshift, d, l));
      } else if (family->value == "separable") {
        std::vector<SeparableCoord> coords;
        for (int j = 0; j < m; ++j) {
          const std::string ckey = prefix + "coord" + std::to_string(j);
          const KV& kv = ctx.need(sec, "problem", ckey);
          std::istringstream in(kv.value);
          std::string kind;
          in >> kind;
          std::vector<double> nums;
          double v;
          while (in >> v) nums.push_back(v);
          if (kind == "lse") {
            if (nums.size() < 2) {
              throw ParseError(kv.line, "key '" + ckey + "': lse needs at least two exponents");
            }
            coords.push_back(LseCoord{nums});
          } else if (kind == "quad") {
            if (nums.empty() || nums.size() > 2) {
              throw ParseError(kv.line, "key '" + ckey + "': quad takes 'quad q [b]'");
            }
            coords.push_back(QuadCoord{nums[0], nums.size() > 1 ? nums[1] : 0.0});
          } else {
            throw ParseError(kv.line, "key '" + ckey + "': term must be 'lse ...' or 'quad ...'");
          }
        }
        costs.push_back(CostSpec::separable(std::move(coords), cshift, d, l));
      } else {
        throw ParseError(family->line,
                         "unknown family '" + family->value + "' (quadratic | separable)");
      }
    } catch (const ConfigError& e) {
      throw ParseError(family->line, "node " + std::to_string(i) + ": " + e.what());
    }
  }
  return costs;
}

GraphSchedule build_schedule(Ctx& ctx, SectionData& sec, double horizon) {
  if (const KV* builtin = ctx.find(sec, "builtin")) {
    if (builtin->value != "ten_node_default") {
      throw ParseError(builtin->line, "unknown builtin graph '" + builtin->value + "'");
    }
    return default_ten_node_schedule(horizon);
  }
  const int n = static_cast<int>(to_double(ctx.need(sec, "graph", "n"), "n"));
  if (n < 1 || n > 4096) throw ParseError(sec.line, "node count n must be in [1, 4096]");
  std::vector<GraphSegment> segs;
  for (int k = 0;; ++k) {
    const std::string prefix = "segment" + std::to_string(k) + ".";
    const KV* start = ctx.find(sec, prefix + "start");
    if (!start) {
      if (k == 0) throw ParseError(sec.line, "no segment definitions in [graph]");
      break;
    }
    const KV& wkv = ctx.need(sec, "graph", prefix + "weights");
    const auto wvals = to_doubles(wkv, prefix + "weights");
    if (static_cast<int>(wvals.size()) != n * n) {
      throw ParseError(wkv.line, "key '" + prefix + "weights': expected " +
                                     std::to_string(n * n) + " numbers, got " +
                                     std::to_string(wvals.size()));
    }
    const Eigen::MatrixXd w = Eigen::Map<
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        wvals.data(), n, n);
    try {
      segs.push_back({to_double(*start, prefix + "start"), WeightedDigraph(w)});
    } catch (const ConfigError& e) {
      throw ParseError(wkv.line, std::string("segment ") + std::to_string(k) + ": " + e.what());
    }
  }
  try {
    return GraphSchedule(std::move(segs), horizon);
  } catch (const ConfigError& e) {
    throw ParseError(sec.line, e.what());
  }
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  Sections secs = tokenize(text);
  Ctx ctx(secs);

  SectionData& sim = ctx.need_section("sim");
  const double horizon = to_double(ctx.need(sim, "sim", "horizon"), "horizon");
  const double dt = to_double(ctx.need(sim, "sim", "dt"), "dt");
  if (!(horizon > 0.0)) throw ParseError(sim.line, "horizon must be positive");
  if (!(dt > 0.0)) throw ParseError(sim.line, "dt must be positive");

  SectionData& problem = ctx.need_section("problem");
  std::vector<CostSpec> costs = build_costs(ctx, problem);

  SectionData& graph = ctx.need_section("graph");
  GraphSchedule schedule = build_schedule(ctx, graph, horizon);

  ScenarioConfig cfg(std::move(costs), std::move(schedule));
  cfg.horizon = horizon;
  cfg.dt = dt;

  SectionData& gains = ctx.need_section("gains");
  cfg.alpha = to_double(ctx.need(gains, "gains", "alpha"), "alpha");
  cfg.beta = to_double(ctx.need(gains, "gains", "beta"), "beta");

  SectionData& comm = ctx.need_section("comm");
  const KV& regime = ctx.need(comm, "comm", "regime");
  if (regime.value == "continuous") {
    cfg.regime = Regime::continuous;
  } else if (regime.value == "periodic") {
    cfg.regime = Regime::periodic;
  } else if (regime.value == "event") {
    cfg.regime = Regime::event;
  } else {
    throw ParseError(regime.line, "regime must be continuous, periodic, or event");
  }
  if (cfg.regime == Regime::continuous) {
    if (const KV* ts = ctx.find(comm, "ts")) {
      throw ParseError(ts->line, "ts is not used in the continuous regime");
    }
  } else {
    cfg.ts = to_double(ctx.need(comm, "comm", "ts"), "ts");
  }
  if (cfg.regime == Regime::event) {
    cfg.c = to_double(ctx.need(comm, "comm", "c"), "c");
  } else if (const KV* ckv = ctx.find(comm, "c")) {
    throw ParseError(ckv->line, "trigger scale c is only used in the event regime");
  }

  if (const KV* seed = ctx.find(sim, "seed")) {
    cfg.seed = to_seed(*seed, "seed");
  } else {
    cfg.seed = kDefaultSeed;
  }
  if (const KV* x0 = ctx.find(sim, "x0")) {
    const int n = static_cast<int>(cfg.costs.size());
    const int m = cfg.costs.front().dim();
    std::vector<Eigen::VectorXd> vecs;
    std::string group;
    std::istringstream in(x0->value);
    while (std::getline(in, group, '|')) {
      KV fake{x0->line, trim(group), true};
      vecs.push_back(to_vector(fake, "x0", m));
    }
    if (static_cast<int>(vecs.size()) != n) {
      throw ParseError(x0->line, "x0 must list " + std::to_string(n) +
                                     " groups separated by '|'");
    }
    cfg.x0 = std::move(vecs);
  }

  ctx.finish();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace dra
