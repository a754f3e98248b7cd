#include "dra/conditions.hpp"

#include <cmath>
#include <limits>

#include "dra/errors.hpp"

namespace dra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_gains_shape(const Eigen::VectorXd& l, double alpha) {
  if (l.size() < 1) throw ConfigError("need at least one node");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
  if ((l.array() <= 0.0).any() || !l.allFinite()) {
    throw ConfigError("curvature bounds l must be positive");
  }
}

}  // namespace

double beta_bound_centralized(const GraphSchedule& schedule,
                              const Eigen::VectorXd& l, double alpha) {
  check_gains_shape(l, alpha);
  if (l.size() != schedule.n()) throw ConfigError("l must have one entry per node");
  const Eigen::MatrixXd d2 = l.array().square().matrix().asDiagonal();
  double bound = kInf;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (size_t k = 0; k < schedule.segments().size(); ++k) {
    const Eigen::MatrixXd lap = laplacian(schedule.segments()[k].graph);
    eig.compute(lap + lap.transpose(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const double smax = ev.maxCoeff();
    if (!(smax > 0.0)) {
      throw ConfigError("segment " + std::to_string(k) + " has no edges");
    }
    // Smallest eigenvalue above a relative zero threshold; the balanced
    // Laplacian always contributes one structural zero.
    const double zero_tol = 1e-9 * smax;
    double smin_pos = kInf;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev(i) > zero_tol) smin_pos = std::min(smin_pos, ev(i));
    }
    if (smin_pos == kInf) {
      throw ConfigError("segment " + std::to_string(k) +
                        " has no positive Laplacian eigenvalue");
    }
    eig.compute(lap.transpose() * d2 * lap, Eigen::EigenvaluesOnly);
    const double denom = eig.eigenvalues().maxCoeff();
    bound = std::min(bound, alpha * alpha * smin_pos / (2.0 * denom));
  }
  return bound;
}

double beta_bound_distributed(const Eigen::VectorXd& l,
                              const Eigen::VectorXd& din_sup, double alpha) {
  return beta_bound_sampled(l, din_sup, alpha, 0.0);
}

double beta_bound_heuristic(const Eigen::VectorXd& l, int n, double alpha) {
  check_gains_shape(l, alpha);
  if (n < 2) throw ConfigError("heuristic bound needs at least two nodes");
  return alpha * alpha / (2.0 * l.maxCoeff() * static_cast<double>(n - 1));
}

double beta_bound_sampled(const Eigen::VectorXd& l, const Eigen::VectorXd& din_sup,
                          double alpha, double ts) {
  check_gains_shape(l, alpha);
  if (din_sup.size() != l.size()) throw ConfigError("din_sup must match l");
  if ((din_sup.array() < 0.0).any()) throw ConfigError("in-degrees must be nonnegative");
  if (!(ts >= 0.0) || !std::isfinite(ts)) throw ConfigError("ts must be nonnegative");
  double bound = kInf;
  for (int i = 0; i < l.size(); ++i) {
    if (din_sup(i) <= 0.0) continue;
    const double li = l(i);
    bound = std::min(bound, 1.0 / (2.0 * din_sup(i) *
                                   (li * li / (alpha * alpha) + ts * li / alpha)));
  }
  if (bound == kInf) {
    throw ConfigError("every node is isolated in every segment");
  }
  return bound;
}

GainCertificate sampling_admissible(const Eigen::VectorXd& l,
                                    const Eigen::VectorXd& din_sup, double alpha,
                                    double beta, double ts) {
  check_gains_shape(l, alpha);
  if (din_sup.size() != l.size()) throw ConfigError("din_sup must match l");
  if ((din_sup.array() < 0.0).any()) throw ConfigError("in-degrees must be nonnegative");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
  if (!(ts >= 0.0) || !std::isfinite(ts)) throw ConfigError("ts must be nonnegative");

  GainCertificate cert;
  cert.alpha = alpha;
  cert.beta = beta;
  cert.ts = ts;
  cert.method = (ts > 0.0) ? "sampled-eq19" : "distributed-eq14";
  cert.per_node_margin.resize(l.size());
  cert.ts_supremum = kInf;
  for (int i = 0; i < l.size(); ++i) {
    const double li = l(i);
    cert.per_node_margin(i) =
        0.5 - beta * din_sup(i) * (li * li / (alpha * alpha) + ts * li / alpha);
    if (din_sup(i) > 0.0) {
      const double sup =
          (1.0 / (2.0 * beta * din_sup(i)) - li * li / (alpha * alpha)) * alpha / li;
      cert.ts_supremum = std::min(cert.ts_supremum, sup);
    }
  }
  return cert;
}

double trigger_coefficient(double l_i, double din_i_k, double alpha, double beta,
                           double ts, double c_i) {
  if (!(l_i > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError("l, alpha, and beta must be positive");
  }
  if (!(ts >= 0.0)) throw ConfigError("ts must be nonnegative");
  if (!(c_i > 0.0) || !(c_i < 1.0)) {
    throw ConfigError("trigger scale c must lie strictly between 0 and 1");
  }
  if (din_i_k < 0.0) throw ConfigError("in-degree must be nonnegative");
  if (din_i_k == 0.0) return 0.0;
  const double margin =
      0.5 - beta * din_i_k * (l_i * l_i / (alpha * alpha) + ts * l_i / alpha);
  return (c_i / din_i_k) * margin * margin;
}

}  // namespace dra
