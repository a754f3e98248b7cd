#include "dra/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LseEval {
  double value;      // ln sum_k exp(a_k x)
  double slope;      // d/dx, a convex combination of the exponents
  double curvature;  // d2/dx2, the softmax variance of the exponents
};

LseEval lse_eval(const std::vector<double>& a, double x) {
  double shift = -kInf;
  for (double ak : a) shift = std::max(shift, ak * x);
  double s = 0.0, s1 = 0.0, s2 = 0.0;
  for (double ak : a) {
    const double w = std::exp(ak * x - shift);
    s += w;
    s1 += ak * w;
    s2 += ak * ak * w;
  }
  LseEval e;
  e.value = std::log(s) + shift;
  e.slope = s1 / s;
  e.curvature = std::max(0.0, s2 / s - e.slope * e.slope);
  return e;
}

std::string coord_range_text(double lo, double hi) {
  auto one = [](double v) {
    if (v == kInf) return std::string("inf");
    if (v == -kInf) return std::string("-inf");
    return std::to_string(v);
  };
  return "(" + one(lo) + ", " + one(hi) + ")";
}

}  // namespace

void CostSpec::check_dim(const Eigen::VectorXd& v, const char* what) const {
  if (v.size() != m_) {
    throw ConfigError(std::string(what) + " has dimension " +
                      std::to_string(v.size()) + ", expected " + std::to_string(m_));
  }
}

CostSpec CostSpec::quadratic(Eigen::MatrixXd q, Eigen::VectorXd b, double c,
                             Eigen::VectorXd d, double l) {
  CostSpec s;
  s.quadratic_ = true;
  s.m_ = static_cast<int>(q.rows());
  if (q.rows() != q.cols() || s.m_ < 1) throw ConfigError("Q must be square and nonempty");
  if (b.size() != s.m_ || d.size() != s.m_) {
    throw ConfigError("b and d must match the dimension of Q");
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (((q - q.transpose()).cwiseAbs().array() > 1e-12 * scale).any()) {
    throw ConfigError("Q must be symmetric");
  }
  s.q_llt_.compute(q);
  if (s.q_llt_.info() != Eigen::Success) {
    throw ConfigError("Q must be positive definite");
  }
  if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("curvature bound l must be positive");
  s.q_ = std::move(q);
  s.b_ = std::move(b);
  s.c_ = c;
  s.d_ = std::move(d);
  s.l_ = l;
  s.dom_lo_ = Eigen::VectorXd::Constant(s.m_, -kInf);
  s.dom_hi_ = Eigen::VectorXd::Constant(s.m_, kInf);
  s.dom_margin_ = Eigen::VectorXd::Zero(s.m_);
  return s;
}

CostSpec CostSpec::separable(std::vector<SeparableCoord> coords, double c,
                             Eigen::VectorXd d, double l) {
  CostSpec s;
  s.quadratic_ = false;
  s.m_ = static_cast<int>(coords.size());
  if (s.m_ < 1) throw ConfigError("separable cost needs at least one coordinate");
  if (d.size() != s.m_) throw ConfigError("d must match the number of coordinates");
  if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("curvature bound l must be positive");
  s.dom_lo_.resize(s.m_);
  s.dom_hi_.resize(s.m_);
  s.dom_margin_ = Eigen::VectorXd::Zero(s.m_);
  for (int j = 0; j < s.m_; ++j) {
    if (const auto* qc = std::get_if<QuadCoord>(&coords[j])) {
      if (!(qc->q > 0.0) || !std::isfinite(qc->q) || !std::isfinite(qc->b)) {
        throw ConfigError("coordinate " + std::to_string(j) +
                          ": quadratic curvature must be positive and finite");
      }
      s.dom_lo_(j) = -kInf;
      s.dom_hi_(j) = kInf;
    } else {
      const auto& a = std::get<LseCoord>(coords[j]).exponents;
      double lo = kInf, hi = -kInf;
      for (double ak : a) {
        if (!std::isfinite(ak)) {
          throw ConfigError("coordinate " + std::to_string(j) + ": exponent not finite");
        }
        lo = std::min(lo, ak);
        hi = std::max(hi, ak);
      }
      if (a.size() < 2 || !(hi > lo)) {
        throw ConfigError("coordinate " + std::to_string(j) +
                          ": log-sum-exp needs at least two distinct exponents");
      }
      // Gradient range is the open interval between the extreme exponents.
      s.dom_lo_(j) = lo;
      s.dom_hi_(j) = hi;
      s.dom_margin_(j) =
          kBoundaryMargin * std::max({1.0, std::abs(lo), std::abs(hi)});
    }
  }
  s.coords_ = std::move(coords);
  s.c_ = c;
  s.d_ = std::move(d);
  s.l_ = l;
  return s;
}

double CostSpec::value(const Eigen::VectorXd& x) const {
  check_dim(x, "x");
  if (quadratic_) {
    return 0.5 * x.dot(q_ * x) + b_.dot(x) + c_;
  }
  double v = c_;
  for (int j = 0; j < m_; ++j) {
    if (const auto* qc = std::get_if<QuadCoord>(&coords_[j])) {
      v += 0.5 * qc->q * x(j) * x(j) + qc->b * x(j);
    } else {
      v += lse_eval(std::get<LseCoord>(coords_[j]).exponents, x(j)).value;
    }
  }
  return v;
}

Eigen::VectorXd CostSpec::gradient(const Eigen::VectorXd& x) const {
  check_dim(x, "x");
  if (quadratic_) return q_ * x + b_;
  Eigen::VectorXd g(m_);
  for (int j = 0; j < m_; ++j) {
    if (const auto* qc = std::get_if<QuadCoord>(&coords_[j])) {
      g(j) = qc->q * x(j) + qc->b;
    } else {
      g(j) = lse_eval(std::get<LseCoord>(coords_[j]).exponents, x(j)).slope;
    }
  }
  return g;
}

Eigen::MatrixXd CostSpec::hessian(const Eigen::VectorXd& x) const {
  check_dim(x, "x");
  if (quadratic_) return q_;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m_, m_);
  for (int j = 0; j < m_; ++j) {
    if (const auto* qc = std::get_if<QuadCoord>(&coords_[j])) {
      h(j, j) = qc->q;
    } else {
      h(j, j) = lse_eval(std::get<LseCoord>(coords_[j]).exponents, x(j)).curvature;
    }
  }
  return h;
}

bool CostSpec::in_domain(const Eigen::VectorXd& lambda) const {
  check_dim(lambda, "lambda");
  for (int j = 0; j < m_; ++j) {
    if (!std::isfinite(lambda(j))) return false;
    if (dom_lo_(j) != -kInf && !(lambda(j) > dom_lo_(j) + dom_margin_(j))) return false;
    if (dom_hi_(j) != kInf && !(lambda(j) < dom_hi_(j) - dom_margin_(j))) return false;
  }
  return true;
}

double CostSpec::boundary_clearance(const Eigen::VectorXd& lambda) const {
  check_dim(lambda, "lambda");
  double clearance = kInf;
  for (int j = 0; j < m_; ++j) {
    if (dom_lo_(j) != -kInf) clearance = std::min(clearance, lambda(j) - dom_lo_(j));
    if (dom_hi_(j) != kInf) clearance = std::min(clearance, dom_hi_(j) - lambda(j));
  }
  return clearance;
}

Eigen::VectorXd CostSpec::inverse_gradient(const Eigen::VectorXd& lambda) const {
  check_dim(lambda, "lambda");
  if (quadratic_) {
    Eigen::VectorXd rhs = lambda - b_;
    Eigen::VectorXd x = q_llt_.solve(rhs);
    // One step of iterative refinement keeps the residual near round-off even
    // for ill-conditioned Q.
    x -= q_llt_.solve(q_ * x - rhs);
    if ((q_ * x - rhs).norm() > kInverseTol) {
      throw NumericError("quadratic inverse gradient residual above tolerance");
    }
    return x;
  }
  Eigen::VectorXd x(m_);
  const double coord_tol = kInverseTol / std::sqrt(static_cast<double>(m_));
  for (int j = 0; j < m_; ++j) {
    const double lam = lambda(j);
    if (const auto* qc = std::get_if<QuadCoord>(&coords_[j])) {
      if (!std::isfinite(lam)) {
        throw DomainError("dual coordinate " + std::to_string(j) + " is not finite");
      }
      x(j) = (lam - qc->b) / qc->q;
      continue;
    }
    const auto& a = std::get<LseCoord>(coords_[j]).exponents;
    const double lo = dom_lo_(j), hi = dom_hi_(j), margin = dom_margin_(j);
    if (!std::isfinite(lam) || !(lam > lo + margin) || !(lam < hi - margin)) {
      throw DomainError("dual coordinate " + std::to_string(j) + " value " +
                        std::to_string(lam) + " outside open gradient range " +
                        coord_range_text(lo, hi));
    }
    // Bracket the root of slope(x) = lam by doubling, then run Newton with a
    // bisection safeguard. The slope is strictly increasing.
    double blo, bhi;
    double g0 = lse_eval(a, 0.0).slope;
    int budget = kInverseMaxIter;
    if (g0 < lam) {
      blo = 0.0;
      bhi = 1.0;
      while (lse_eval(a, bhi).slope < lam) {
        blo = bhi;
        bhi *= 2.0;
        if (--budget == 0) throw NumericError("inverse gradient bracket expansion stalled");
      }
    } else {
      bhi = 0.0;
      blo = -1.0;
      while (lse_eval(a, blo).slope > lam) {
        bhi = blo;
        blo *= 2.0;
        if (--budget == 0) throw NumericError("inverse gradient bracket expansion stalled");
      }
    }
    double xj = 0.5 * (blo + bhi);
    bool done = false;
    for (int it = 0; it < kInverseMaxIter; ++it) {
      const LseEval e = lse_eval(a, xj);
      const double r = e.slope - lam;
      if (std::abs(r) <= coord_tol) {
        done = true;
        break;
      }
      if (r > 0.0) {
        bhi = xj;
      } else {
        blo = xj;
      }
      double xn = (e.curvature > 0.0) ? xj - r / e.curvature : blo - 1.0;
      if (!std::isfinite(xn) || !(xn > blo) || !(xn < bhi)) {
        xn = 0.5 * (blo + bhi);
      }
      xj = xn;
    }
    if (!done) {
      throw NumericError("inverse gradient Newton did not converge for coordinate " +
                         std::to_string(j));
    }
    x(j) = xj;
  }
  return x;
}

Eigen::MatrixXd CostSpec::inverse_gradient_jacobian(const Eigen::VectorXd& lambda) const {
  if (quadratic_) {
    return q_llt_.solve(Eigen::MatrixXd::Identity(m_, m_));
  }
  const Eigen::VectorXd x = inverse_gradient(lambda);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m_, m_);
  for (int j = 0; j < m_; ++j) {
    if (const auto* qc = std::get_if<QuadCoord>(&coords_[j])) {
      jac(j, j) = 1.0 / qc->q;
    } else {
      const double cur = lse_eval(std::get<LseCoord>(coords_[j]).exponents, x(j)).curvature;
      if (!(cur > 0.0)) {
        throw NumericError("vanishing curvature for coordinate " + std::to_string(j));
      }
      jac(j, j) = 1.0 / cur;
    }
  }
  return jac;
}

double DualFunction::value(const Eigen::VectorXd& lambda) const {
  const CostSpec& c = *source_;
  const Eigen::VectorXd x = c.inverse_gradient(lambda);
  return -(c.value(x) + lambda.dot(c.demand() - x));
}

Eigen::VectorXd DualFunction::gradient(const Eigen::VectorXd& lambda) const {
  return source_->inverse_gradient(lambda) - source_->demand();
}

Eigen::VectorXd gradient(const CostSpec& c, const Eigen::VectorXd& x) {
  return c.gradient(x);
}

Eigen::VectorXd inverse_gradient(const CostSpec& c, const Eigen::VectorXd& lambda) {
  return c.inverse_gradient(lambda);
}

double dual_value(const CostSpec& c, const Eigen::VectorXd& lambda) {
  return DualFunction(c).value(lambda);
}

Eigen::VectorXd dual_gradient(const CostSpec& c, const Eigen::VectorXd& lambda) {
  return DualFunction(c).gradient(lambda);
}

Assumption1Report validate_assumption1(const CostSpec& c,
                                       const Eigen::VectorXd& box_lo,
                                       const Eigen::VectorXd& box_hi,
                                       long n_samples) {
  const int m = c.dim();
  if (box_lo.size() != m || box_hi.size() != m) {
    throw ConfigError("sample box must match the cost dimension");
  }
  if ((box_hi - box_lo).minCoeff() < 0.0) {
    throw ConfigError("sample box is empty");
  }
  if (n_samples < 1) throw ConfigError("need at least one sample");

  // Axis-uniform grid with at least n_samples points in total.
  long k = 1;
  while (std::pow(static_cast<double>(k), m) < static_cast<double>(n_samples)) ++k;

  Assumption1Report rep;
  rep.min_eig = kInf;
  rep.max_eig = -kInf;
  const double slack = 1e-9 * std::max(1.0, c.lipschitz());

  std::vector<long> idx(m, 0);
  Eigen::VectorXd x(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  bool more = true;
  while (more) {
    for (int jdim = 0; jdim < m; ++jdim) {
      x(jdim) = (k == 1) ? 0.5 * (box_lo(jdim) + box_hi(jdim))
                         : box_lo(jdim) + (box_hi(jdim) - box_lo(jdim)) *
                               static_cast<double>(idx[jdim]) /
                               static_cast<double>(k - 1);
    }
    eig.compute(c.hessian(x), Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    rep.min_eig = std::min(rep.min_eig, lo);
    rep.max_eig = std::max(rep.max_eig, hi);
    ++rep.n_checked;
    if (!rep.has_violation && (!(lo > 0.0) || hi > c.lipschitz() + slack)) {
      rep.has_violation = true;
      rep.violating_point = x;
    }
    // Advance the multi-index.
    more = false;
    for (int jdim = 0; jdim < m; ++jdim) {
      if (++idx[jdim] < k) {
        more = true;
        break;
      }
      idx[jdim] = 0;
    }
  }
  rep.pass = !rep.has_violation;
  return rep;
}

}  // namespace dra
