#include <cmath>
#include <limits>

#include "doctest.h"
#include "dra/conditions.hpp"
#include "dra/graph.hpp"
#include "dra/scenario.hpp"

using namespace dra;

namespace {

GraphSchedule two_node_symmetric() {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  return GraphSchedule({{0.0, WeightedDigraph(a)}}, 1.0);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<long>(v.size()));
  long i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

}  // namespace

TEST_CASE("two symmetric nodes: every bound evaluates to one half") {
  const GraphSchedule s = two_node_symmetric();
  const Eigen::VectorXd l = vec({1.0, 1.0});
  const Eigen::VectorXd din = vec({1.0, 1.0});
  CHECK(beta_bound_centralized(s, l, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_bound_distributed(l, din, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_bound_heuristic(l, 2, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_bound_sampled(l, din, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));

  // alpha scaling is quadratic, curvature scaling is inverse quadratic.
  CHECK(beta_bound_centralized(s, l, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(beta_bound_centralized(s, vec({2.0, 2.0}), 1.0) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(beta_bound_distributed(l, din, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("per-node distributed bound takes the tightest node") {
  const Eigen::VectorXd din = vec({1.0, 1.0});
  CHECK(beta_bound_distributed(vec({1.0, 3.0}), din, 1.0) ==
        doctest::Approx(1.0 / 18.0).epsilon(1e-12));
  // alpha = 2, l = 2, din = 1: 4 / (2 * 4) = 1/2.
  CHECK(beta_bound_distributed(vec({2.0}), vec({1.0}), 2.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // Isolated nodes do not constrain the bound.
  CHECK(beta_bound_distributed(vec({100.0, 1.0}), vec({0.0, 1.0}), 1.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stock ten-node problem: frozen design numbers") {
  const auto costs = ten_node_costs();
  Eigen::VectorXd l(10);
  for (int i = 0; i < 10; ++i) l(i) = costs[i].lipschitz();
  const GraphSchedule s = default_ten_node_schedule(4.0);
  const Eigen::VectorXd din = s.max_in_degrees();
  CHECK((din.array() == 1.0).all());

  CHECK(beta_bound_distributed(l, din, 1.0) ==
        doctest::Approx(0.1023730063).epsilon(1e-9));
  CHECK(beta_bound_heuristic(l, 10, 1.0) ==
        doctest::Approx(0.0251382604).epsilon(1e-9));

  const GainCertificate cert = sampling_admissible(l, din, 1.0, 0.05, 0.0);
  CHECK(cert.valid());
  CHECK(cert.method == "distributed-eq14");
  CHECK(cert.ts_supremum == doctest::Approx(2.3148868778).epsilon(1e-9));

  // The sampled bound follows 1/(2 l (l + ts)) for the stiffest node.
  for (double ts : {0.0, 0.5, 1.0, 2.0}) {
    const double expect = 1.0 / (2.0 * (2.21 * 2.21 + ts * 2.21));
    CHECK(beta_bound_sampled(l, din, 1.0, ts) ==
          doctest::Approx(expect).epsilon(1e-12));
  }

  // Certificate margins match the defining formula node by node.
  const GainCertificate c19 = sampling_admissible(l, din, 1.0, 0.05, 0.5);
  CHECK(c19.method == "sampled-eq19");
  for (int i = 0; i < 10; ++i) {
    const double expect = 0.5 - 0.05 * 1.0 * (l(i) * l(i) + 0.5 * l(i));
    CHECK(c19.per_node_margin(i) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(c19.valid());

  // Larger beta than the sampled bound invalidates exactly one side.
  const double bnd = beta_bound_sampled(l, din, 1.0, 0.5);
  CHECK(sampling_admissible(l, din, 1.0, bnd - 1e-9, 0.5).valid());
  CHECK_FALSE(sampling_admissible(l, din, 1.0, bnd + 1e-9, 0.5).valid());
}

TEST_CASE("centralized bound is reported alongside the distributed one") {
  // On the symmetric pair both formulas coincide; on general digraphs they
  // need not, so the pair is surfaced for comparison rather than asserted.
  const GraphSchedule s = two_node_symmetric();
  const Eigen::VectorXd l = vec({1.0, 1.0});
  const double c = beta_bound_centralized(s, l, 1.0);
  const double d = beta_bound_distributed(l, vec({1.0, 1.0}), 1.0);
  CHECK(c == doctest::Approx(d).epsilon(1e-12));

  const auto costs = ten_node_costs();
  Eigen::VectorXd lten(10);
  for (int i = 0; i < 10; ++i) lten(i) = costs[i].lipschitz();
  const GraphSchedule ten = default_ten_node_schedule(4.0);
  const double cen = beta_bound_centralized(ten, lten, 1.0);
  CHECK(cen > 0.0);
  CHECK(std::isfinite(cen));
}

TEST_CASE("bounds shrink with period, curvature, and degree") {
  const Eigen::VectorXd l = vec({2.0, 1.5});
  const Eigen::VectorXd din = vec({1.0, 2.0});
  double prev = beta_bound_sampled(l, din, 1.0, 0.0);
  for (double ts : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double b = beta_bound_sampled(l, din, 1.0, ts);
    CHECK(b < prev);
    prev = b;
  }
  CHECK(beta_bound_distributed(vec({2.0}), vec({1.0}), 1.0) <
        beta_bound_distributed(vec({1.0}), vec({1.0}), 1.0));
  CHECK(beta_bound_distributed(vec({1.0}), vec({3.0}), 1.0) <
        beta_bound_distributed(vec({1.0}), vec({2.0}), 1.0));

  // Margins fall linearly in beta; the sampling supremum falls too.
  const GainCertificate a = sampling_admissible(l, din, 1.0, 0.05, 0.1);
  const GainCertificate b = sampling_admissible(l, din, 1.0, 0.10, 0.1);
  CHECK((b.per_node_margin.array() < a.per_node_margin.array()).all());
  CHECK(b.ts_supremum < a.ts_supremum);
}

TEST_CASE("trigger coefficient frozen value and structure") {
  // Stiffest stock node at beta = 0.09, ts = 0.1, c = 0.5.
  CHECK(trigger_coefficient(2.21, 1.0, 1.0, 0.09, 0.1, 0.5) ==
        doctest::Approx(8.2178634050e-4).epsilon(1e-9));
  // Zero margin gives a zero threshold.
  CHECK(trigger_coefficient(1.0, 1.0, 1.0, 0.5, 0.0, 0.5) == 0.0);
  // Linear in c.
  const double c4 = trigger_coefficient(2.0, 1.0, 1.0, 0.05, 0.2, 0.4);
  const double c8 = trigger_coefficient(2.0, 1.0, 1.0, 0.05, 0.2, 0.8);
  CHECK(c8 == doctest::Approx(2.0 * c4).epsilon(1e-12));
  // Isolated nodes never trigger on neighbors.
  CHECK(trigger_coefficient(2.0, 0.0, 1.0, 0.05, 0.2, 0.5) == 0.0);

  CHECK_THROWS_AS(trigger_coefficient(2.0, 1.0, 1.0, 0.05, 0.2, 0.0), ConfigError);
  CHECK_THROWS_AS(trigger_coefficient(2.0, 1.0, 1.0, 0.05, 0.2, 1.0), ConfigError);
  CHECK_THROWS_AS(trigger_coefficient(2.0, 1.0, 1.0, 0.05, 0.2, 1.5), ConfigError);
  CHECK_THROWS_AS(trigger_coefficient(2.0, 1.0, 1.0, 0.05, 0.2, -0.1), ConfigError);
  CHECK_THROWS_AS(trigger_coefficient(-2.0, 1.0, 1.0, 0.05, 0.2, 0.5), ConfigError);
}

TEST_CASE("design functions reject degenerate inputs") {
  const Eigen::VectorXd l1 = vec({1.0});
  CHECK_THROWS_AS(beta_bound_heuristic(l1, 1, 1.0), ConfigError);
  CHECK_THROWS_AS(beta_bound_distributed(l1, vec({0.0}), 1.0), ConfigError);
  CHECK_THROWS_AS(beta_bound_sampled(l1, vec({1.0}), 1.0, -0.5), ConfigError);
  CHECK_THROWS_AS(beta_bound_sampled(l1, vec({1.0, 1.0}), 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(beta_bound_distributed(vec({-1.0}), vec({1.0}), 1.0), ConfigError);
  CHECK_THROWS_AS(beta_bound_distributed(l1, vec({1.0}), 0.0), ConfigError);
  CHECK_THROWS_AS(sampling_admissible(l1, vec({1.0}), 1.0, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(sampling_admissible(l1, vec({-1.0}), 1.0, 0.05, 0.0), ConfigError);

  const GraphSchedule edgeless(
      {{0.0, WeightedDigraph(Eigen::MatrixXd::Zero(2, 2))}}, 1.0);
  CHECK_THROWS_AS(beta_bound_centralized(edgeless, vec({1.0, 1.0}), 1.0), ConfigError);
}
