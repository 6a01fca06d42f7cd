#include "ccop/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace ccop {
namespace {

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw EvaluationError(what + " returned a non-finite value");
}

void require_finite(const Matrix& v, const std::string& what) {
  if (!v.allFinite()) throw EvaluationError(what + " returned a non-finite value");
}

void require_size(Eigen::Index got, int want, const std::string& what) {
  if (got != want) {
    throw EvaluationError(what + " returned " + std::to_string(got) +
                          " entries, expected " + std::to_string(want));
  }
}

}  // namespace

CcopProblem::CcopProblem(std::string name, Dimensions dims, ProblemFunctions fns,
                         bool level_bounded)
    : name_(std::move(name)), dims_(dims), fns_(std::move(fns)),
      level_bounded_(level_bounded) {
  if (dims_.n <= 0) throw std::invalid_argument("n must be positive");
  if (dims_.m < 0 || dims_.p < 0) throw std::invalid_argument("m and p must be >= 0");
  if (dims_.kappa < 0 || dims_.kappa > dims_.n) {
    throw std::invalid_argument("kappa must satisfy 0 <= kappa <= n");
  }
  if (!fns_.f || !fns_.grad_f) throw std::invalid_argument("objective callbacks are required");
  if (dims_.m > 0 && (!fns_.g || !fns_.jac_g)) {
    throw std::invalid_argument("m > 0 requires inequality callbacks");
  }
  if (dims_.p > 0 && (!fns_.h || !fns_.jac_h)) {
    throw std::invalid_argument("p > 0 requires equality callbacks");
  }
}

void CcopProblem::check_input(const Vector& x) const {
  if (x.size() != dims_.n) {
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", problem '" + name_ + "' has n = " +
                                std::to_string(dims_.n));
  }
}

double CcopProblem::objective(const Vector& x) const {
  check_input(x);
  const double v = fns_.f(x);
  if (!std::isfinite(v)) throw EvaluationError("f returned a non-finite value");
  return v;
}

Vector CcopProblem::objective_gradient(const Vector& x) const {
  check_input(x);
  Vector gf = fns_.grad_f(x);
  require_size(gf.size(), dims_.n, "grad_f");
  require_finite(gf, "grad_f");
  return gf;
}

Vector CcopProblem::ineq(const Vector& x) const {
  check_input(x);
  if (dims_.m == 0) return Vector(0);
  Vector v = fns_.g(x);
  require_size(v.size(), dims_.m, "g");
  require_finite(v, "g");
  return v;
}

Matrix CcopProblem::ineq_jacobian(const Vector& x) const {
  check_input(x);
  if (dims_.m == 0) return Matrix(dims_.n, 0);
  Matrix J = fns_.jac_g(x);
  if (J.rows() != dims_.n || J.cols() != dims_.m) {
    throw EvaluationError("jac_g has the wrong shape");
  }
  require_finite(J, "jac_g");
  return J;
}

Vector CcopProblem::eq(const Vector& x) const {
  check_input(x);
  if (dims_.p == 0) return Vector(0);
  Vector v = fns_.h(x);
  require_size(v.size(), dims_.p, "h");
  require_finite(v, "h");
  return v;
}

Matrix CcopProblem::eq_jacobian(const Vector& x) const {
  check_input(x);
  if (dims_.p == 0) return Matrix(dims_.n, 0);
  Matrix J = fns_.jac_h(x);
  if (J.rows() != dims_.n || J.cols() != dims_.p) {
    throw EvaluationError("jac_h has the wrong shape");
  }
  require_finite(J, "jac_h");
  return J;
}

CcopProblem CcopProblem::with_kappa(int kappa) const {
  Dimensions d = dims_;
  d.kappa = kappa;
  return CcopProblem(name_, d, fns_, level_bounded_);
}

double FeasibilityReport::relaxation_max() const {
  return std::max({viol_g, viol_h, viol_comp, viol_card, viol_box});
}

IndexSets classify_indices(const CcopProblem& prob, const Vector& x, double tol_active) {
  if (!(tol_active > 0.0)) throw std::invalid_argument("tol_active must be positive");
  if (x.size() != prob.n()) throw std::invalid_argument("dimension mismatch between x and n");
  IndexSets sets;
  sets.tol_active = tol_active;
  const Vector gx = prob.ineq(x);
  for (int i = 0; i < prob.m(); ++i) {
    if (std::abs(gx[i]) <= tol_active) sets.active_g.push_back(i);
  }
  for (int i = 0; i < prob.n(); ++i) {
    if (std::abs(x[i]) <= tol_active) {
      sets.zero_x.push_back(i);
    } else {
      sets.nonzero_x.push_back(i);
    }
  }
  return sets;
}

FeasibilityReport feasibility(const CcopProblem& prob, const RelaxedPoint& pt,
                              double tol_active) {
  const int n = prob.n();
  if (pt.x.size() != n || pt.y.size() != n) {
    throw std::invalid_argument("relaxed point dimension mismatch");
  }
  FeasibilityReport r;
  const Vector gx = prob.ineq(pt.x);
  const Vector hx = prob.eq(pt.x);
  if (gx.size() > 0) r.viol_g = gx.cwiseMax(0.0).maxCoeff();
  if (hx.size() > 0) r.viol_h = hx.cwiseAbs().maxCoeff();
  r.viol_comp = pt.x.cwiseProduct(pt.y).cwiseAbs().maxCoeff();
  r.viol_card = std::max(0.0, static_cast<double>(n - prob.kappa()) - pt.y.sum());
  r.viol_box = (pt.y.array() - 1.0).cwiseMax(0.0).maxCoeff();
  r.viol_l0 = std::max(support_size(pt.x, tol_active) - prob.kappa(), 0);
  if (!std::isfinite(r.viol_comp) || !std::isfinite(r.viol_card) ||
      !std::isfinite(r.viol_box)) {
    throw EvaluationError("relaxed point contains non-finite entries");
  }
  return r;
}

std::vector<int> magnitude_order(const Vector& x) {
  std::vector<int> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(x[a]) > std::abs(x[b]); });
  return idx;
}

Vector pair_y_for_x(const Vector& x, int kappa) {
  Vector y = Vector::Ones(x.size());
  const auto order = magnitude_order(x);
  const int keep = std::clamp(kappa, 0, static_cast<int>(x.size()));
  for (int r = 0; r < keep; ++r) y[order[r]] = 0.0;
  return y;
}

Vector project_to_cardinality(const Vector& x, int kappa) {
  Vector out = Vector::Zero(x.size());
  const auto order = magnitude_order(x);
  const int keep = std::clamp(kappa, 0, static_cast<int>(x.size()));
  for (int r = 0; r < keep; ++r) out[order[r]] = x[order[r]];
  return out;
}

int support_size(const Vector& x, double tol) {
  return static_cast<int>((x.array().abs() > tol).count());
}

double DerivativeCheck::worst() const { return std::max({grad_f, jac_g, jac_h}); }

DerivativeCheck check_derivatives(const CcopProblem& prob, const std::vector<Vector>& points,
                                  double step) {
  DerivativeCheck out;
  const int n = prob.n();
  auto rel = [](const Matrix& analytic, const Matrix& fd) {
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    return (analytic - fd).cwiseAbs().maxCoeff() / scale;
  };
  for (const Vector& x : points) {
    Vector fd_grad(n);
    Matrix fd_jg(n, prob.m());
    Matrix fd_jh(n, prob.p());
    for (int i = 0; i < n; ++i) {
      Vector xp = x;
      Vector xm = x;
      xp[i] += step;
      xm[i] -= step;
      fd_grad[i] = (prob.objective(xp) - prob.objective(xm)) / (2.0 * step);
      if (prob.m() > 0) fd_jg.row(i) = (prob.ineq(xp) - prob.ineq(xm)).transpose() / (2.0 * step);
      if (prob.p() > 0) fd_jh.row(i) = (prob.eq(xp) - prob.eq(xm)).transpose() / (2.0 * step);
    }
    out.grad_f = std::max(out.grad_f, rel(prob.objective_gradient(x), fd_grad));
    if (prob.m() > 0) out.jac_g = std::max(out.jac_g, rel(prob.ineq_jacobian(x), fd_jg));
    if (prob.p() > 0) out.jac_h = std::max(out.jac_h, rel(prob.eq_jacobian(x), fd_jh));
  }
  return out;
}

}  // namespace ccop
