#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "dra/errors.hpp"

namespace dra {

// Residual tolerance for inverse-gradient solves: the returned x satisfies
// ||grad f(x) - lambda|| <= kInverseTol.
inline constexpr double kInverseTol = 1e-12;
inline constexpr int kInverseMaxIter = 100;
// Relative width of the safety band kept between dual iterates and the
// boundary of the open gradient range.
inline constexpr double kBoundaryMargin = 1e-9;

// One coordinate of a separable cost.
struct QuadCoord {
  double q = 1.0;  // curvature, must be positive
  double b = 0.0;  // linear term
};
struct LseCoord {
  // ln(sum_k exp(a_k * x)); needs at least two distinct exponents to be
  // strictly convex.
  std::vector<double> exponents;
};
using SeparableCoord = std::variant<QuadCoord, LseCoord>;

// Local cost of one node: a strongly convex function, its demand vector, and
// the curvature bound l used by the gain conditions. The gradient range is an
// open box; inverse-gradient queries are rejected within a small safety
// margin of its boundary.
class CostSpec {
 public:
  // f(x) = x'Qx/2 + b'x + c with Q symmetric positive definite.
  static CostSpec quadratic(Eigen::MatrixXd q, Eigen::VectorXd b, double c,
                            Eigen::VectorXd d, double l);
  // f(x) = sum_j term_j(x_j) + c.
  static CostSpec separable(std::vector<SeparableCoord> coords, double c,
                            Eigen::VectorXd d, double l);

  int dim() const { return m_; }
  const Eigen::VectorXd& demand() const { return d_; }
  double lipschitz() const { return l_; }
  bool is_quadratic() const { return quadratic_; }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  // Open box containing exactly the gradient range; unbounded coordinates
  // report +-infinity.
  const Eigen::VectorXd& domain_lo() const { return dom_lo_; }
  const Eigen::VectorXd& domain_hi() const { return dom_hi_; }
  // Strict interior test, safety margin included.
  bool in_domain(const Eigen::VectorXd& lambda) const;
  // Smallest distance from lambda to a finite domain endpoint; +infinity when
  // every coordinate is unbounded. Negative when outside.
  double boundary_clearance(const Eigen::VectorXd& lambda) const;

  // x with grad f(x) = lambda. Closed form for quadratics, safeguarded Newton
  // per coordinate otherwise. Throws DomainError (naming the offending
  // coordinate) outside the open range, NumericError if iteration stalls.
  Eigen::VectorXd inverse_gradient(const Eigen::VectorXd& lambda) const;
  // Jacobian of the map above: inverse of the Hessian at x = h(lambda).
  Eigen::MatrixXd inverse_gradient_jacobian(const Eigen::VectorXd& lambda) const;

 private:
  CostSpec() = default;
  void check_dim(const Eigen::VectorXd& v, const char* what) const;

  bool quadratic_ = true;
  int m_ = 0;
  Eigen::MatrixXd q_;
  Eigen::VectorXd b_;
  Eigen::LLT<Eigen::MatrixXd> q_llt_;
  std::vector<SeparableCoord> coords_;
  double c_ = 0.0;
  Eigen::VectorXd d_;
  double l_ = 0.0;
  Eigen::VectorXd dom_lo_, dom_hi_, dom_margin_;
};

// Convex dual of the demand-constrained problem, per node:
// J(lambda) = -(f(h(lambda)) + lambda'(d - h(lambda))) with h the inverse
// gradient. Minimizing sum_i J_i over a common lambda solves the resource
// allocation problem.
class DualFunction {
 public:
  explicit DualFunction(const CostSpec& source) : source_(&source) {}
  const CostSpec& source() const { return *source_; }
  double value(const Eigen::VectorXd& lambda) const;
  // grad J = h(lambda) - d.
  Eigen::VectorXd gradient(const Eigen::VectorXd& lambda) const;

 private:
  const CostSpec* source_;
};

// Spec-shaped free operations.
Eigen::VectorXd gradient(const CostSpec& c, const Eigen::VectorXd& x);
Eigen::VectorXd inverse_gradient(const CostSpec& c, const Eigen::VectorXd& lambda);
double dual_value(const CostSpec& c, const Eigen::VectorXd& lambda);
Eigen::VectorXd dual_gradient(const CostSpec& c, const Eigen::VectorXd& lambda);

struct Assumption1Report {
  bool pass = false;
  double min_eig = 0.0;  // smallest Hessian eigenvalue over the grid
  double max_eig = 0.0;  // largest Hessian eigenvalue over the grid
  long n_checked = 0;
  bool has_violation = false;
  Eigen::VectorXd violating_point;
};

// Samples the Hessian on a deterministic grid over [box_lo, box_hi] and
// checks 0 < eig <= l. Reports; never throws on violation.
Assumption1Report validate_assumption1(const CostSpec& c,
                                       const Eigen::VectorXd& box_lo,
                                       const Eigen::VectorXd& box_hi,
                                       long n_samples);

}  // namespace dra
