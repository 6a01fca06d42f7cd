#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a user callback returns a non-finite value or a result of the
/// wrong shape. Never swallowed: a NaN reaching a multiplier update poisons
/// every later iterate.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Callbacks describing min f(x) s.t. g(x) <= 0, h(x) = 0.
///
/// Jacobians are dense n x m (resp. n x p) with one column per constraint
/// gradient. The inequality or equality pair may be left empty when m (or p)
/// is zero.
struct ProblemFunctions {
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> jac_g;
  std::function<Vector(const Vector&)> h;
  std::function<Matrix(const Vector&)> jac_h;
};

struct Dimensions {
  int n = 0;
  int m = 0;
  int p = 0;
  int kappa = 0;
};

/// A cardinality-constrained program: the smooth program above plus
/// ||x||_0 <= kappa. Immutable after construction; callbacks must be pure.
///
/// The constructor accepts 0 <= kappa <= n so that support-restricted
/// subproblems (where the bound is vacuous) can reuse the same machinery.
/// User-facing loaders enforce the stricter 0 < kappa < n.
class CcopProblem {
 public:
  CcopProblem(std::string name, Dimensions dims, ProblemFunctions fns,
              bool level_bounded = false);

  const std::string& name() const { return name_; }
  int n() const { return dims_.n; }
  int m() const { return dims_.m; }
  int p() const { return dims_.p; }
  int kappa() const { return dims_.kappa; }
  const Dimensions& dims() const { return dims_; }
  /// Whether the objective is known to have bounded level sets; enables the
  /// divergence diagnostic of the inner solver.
  bool level_bounded() const { return level_bounded_; }

  double objective(const Vector& x) const;
  Vector objective_gradient(const Vector& x) const;
  Vector ineq(const Vector& x) const;
  Matrix ineq_jacobian(const Vector& x) const;
  Vector eq(const Vector& x) const;
  Matrix eq_jacobian(const Vector& x) const;

  /// Same program with a different cardinality bound.
  CcopProblem with_kappa(int kappa) const;

 private:
  void check_input(const Vector& x) const;

  std::string name_;
  Dimensions dims_;
  ProblemFunctions fns_;
  bool level_bounded_ = false;
};

/// A point of the relaxed (x, y) reformulation.
struct RelaxedPoint {
  Vector x;
  Vector y;
};

/// Numeric index sets, 0-based.
struct IndexSets {
  std::vector<int> active_g;   // |g_i(x)| <= tol_active
  std::vector<int> zero_x;     // |x_i| <= tol_active
  std::vector<int> nonzero_x;  // complement of zero_x
  double tol_active = 1e-6;
};

struct FeasibilityReport {
  double viol_g = 0.0;     // ||g(x)_+||_inf
  double viol_h = 0.0;     // ||h(x)||_inf
  double viol_comp = 0.0;  // ||x o y||_inf
  double viol_card = 0.0;  // (n - kappa - e'y)_+
  double viol_box = 0.0;   // ||(y - e)_+||_inf
  int viol_l0 = 0;         // max(||x||_0,tol - kappa, 0)

  /// Largest of the five relaxation violations.
  double relaxation_max() const;
  bool feasible(double tol_feas) const { return relaxation_max() <= tol_feas; }
};

constexpr double kDefaultTolActive = 1e-6;

IndexSets classify_indices(const CcopProblem& prob, const Vector& x,
                           double tol_active = kDefaultTolActive);

FeasibilityReport feasibility(const CcopProblem& prob, const RelaxedPoint& pt,
                              double tol_active = kDefaultTolActive);

/// Auxiliary vector making (x, y) feasible for the relaxation when x is
/// kappa-sparse: y_i = 0 on the kappa largest |x_i|, 1 elsewhere. Ties go to
/// the lowest index.
Vector pair_y_for_x(const Vector& x, int kappa);

/// Keeps the kappa largest-magnitude entries of x (ties: lowest index).
Vector project_to_cardinality(const Vector& x, int kappa);

/// Number of entries with |x_i| > tol.
int support_size(const Vector& x, double tol);

/// Indices ordered by decreasing |x_i|, ties by increasing index.
std::vector<int> magnitude_order(const Vector& x);

struct DerivativeCheck {
  double grad_f = 0.0;
  double jac_g = 0.0;
  double jac_h = 0.0;
  double worst() const;
};

/// Largest relative deviation of the analytic derivatives from central
/// differences over the supplied points. Relative error is
/// ||analytic - fd||_inf / max(1, ||fd||_inf).
DerivativeCheck check_derivatives(const CcopProblem& prob,
                                  const std::vector<Vector>& points,
                                  double step = 1e-6);

}  // namespace ccop
