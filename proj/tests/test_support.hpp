#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Nothing here calls into the library's solvers: the oracles are separate
// implementations used to cross-check them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ccop/problem.hpp"

namespace ccop::testing {

// min 0.5[(x1-1)^2 + (x2-1)^2]  s.t.  x1 x3 <= 0,  ||x||_0 <= 2.
inline CcopProblem example_3_1(int kappa = 2) {
  ProblemFunctions f;
  f.f = [](const Vector& x) { return 0.5 * ((x[0] - 1) * (x[0] - 1) + (x[1] - 1) * (x[1] - 1)); };
  f.grad_f = [](const Vector& x) {
    Vector g(3);
    g << x[0] - 1, x[1] - 1, 0.0;
    return g;
  };
  f.g = [](const Vector& x) {
    Vector v(1);
    v << x[0] * x[2];
    return v;
  };
  f.jac_g = [](const Vector& x) {
    Matrix J(3, 1);
    J << x[2], 0.0, x[0];
    return J;
  };
  return CcopProblem("example_3_1", Dimensions{3, 1, 0, kappa}, f);
}

// min 0.5[(x1-1)^2 + (x2-1)^2]  s.t.  ||x||_0 <= 1.
inline CcopProblem example_3_2() {
  ProblemFunctions f;
  f.f = [](const Vector& x) { return 0.5 * ((x[0] - 1) * (x[0] - 1) + (x[1] - 1) * (x[1] - 1)); };
  f.grad_f = [](const Vector& x) -> Vector { return x - Vector::Ones(2); };
  return CcopProblem("example_3_2", Dimensions{2, 0, 0, 1}, f, true);
}

// min 0.5 ||x||^2  s.t.  x1^2 + 1 <= 0  (no feasible point).
inline CcopProblem infeasible_problem() {
  ProblemFunctions f;
  f.f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  f.grad_f = [](const Vector& x) -> Vector { return x; };
  f.g = [](const Vector& x) {
    Vector v(1);
    v << x[0] * x[0] + 1.0;
    return v;
  };
  f.jac_g = [](const Vector& x) {
    Matrix J = Matrix::Zero(2, 1);
    J(0, 0) = 2 * x[0];
    return J;
  };
  return CcopProblem("infeasible", Dimensions{2, 1, 0, 1}, f, true);
}

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix M(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
  }
  return M;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// Random smooth instance: quartic-plus-quadratic objective, quadratic
// inequalities, affine equalities, all with hand-written derivatives.
inline CcopProblem random_problem(std::mt19937_64& rng, int n, int m, int p, int kappa) {
  const Matrix A = random_matrix(rng, n, n);
  const Matrix Q = A * A.transpose() / n + 0.1 * Matrix::Identity(n, n);
  const Vector c = random_vector(rng, n);
  const double quartic = 0.05;
  std::vector<Matrix> gq;
  std::vector<Vector> ga;
  std::vector<double> gb;
  for (int i = 0; i < m; ++i) {
    const Matrix B = random_matrix(rng, n, n);
    gq.push_back(0.5 * (B + B.transpose()));
    ga.push_back(random_vector(rng, n));
    gb.push_back(random_vector(rng, 1)[0]);
  }
  const Matrix E = random_matrix(rng, p, n);
  const Vector e0 = random_vector(rng, p);

  ProblemFunctions f;
  f.f = [=](const Vector& x) {
    return 0.5 * x.dot(Q * x) + c.dot(x) + quartic * x.array().pow(4).sum();
  };
  f.grad_f = [=](const Vector& x) -> Vector {
    return Q * x + c + 4.0 * quartic * x.array().pow(3).matrix();
  };
  if (m > 0) {
    f.g = [=](const Vector& x) {
      Vector v(m);
      for (int i = 0; i < m; ++i) v[i] = 0.5 * x.dot(gq[i] * x) + ga[i].dot(x) + gb[i];
      return v;
    };
    f.jac_g = [=](const Vector& x) {
      Matrix J(n, m);
      for (int i = 0; i < m; ++i) J.col(i) = gq[i] * x + ga[i];
      return J;
    };
  }
  if (p > 0) {
    f.h = [=](const Vector& x) -> Vector { return E * x + e0; };
    f.jac_h = [=](const Vector&) -> Matrix { return E.transpose(); };
  }
  return CcopProblem("random", Dimensions{n, m, p, kappa}, f);
}

// Same program with g replaced by g - shift.
inline CcopProblem shift_ineq(const CcopProblem& base, const Vector& shift) {
  ProblemFunctions f;
  f.f = [base](const Vector& x) { return base.objective(x); };
  f.grad_f = [base](const Vector& x) { return base.objective_gradient(x); };
  f.g = [base, shift](const Vector& x) -> Vector { return base.ineq(x) - shift; };
  f.jac_g = [base](const Vector& x) { return base.ineq_jacobian(x); };
  if (base.p() > 0) {
    f.h = [base](const Vector& x) { return base.eq(x); };
    f.jac_h = [base](const Vector& x) { return base.eq_jacobian(x); };
  }
  return CcopProblem(base.name(), base.dims(), f);
}

// Central differences.
inline Vector fd_gradient(const std::function<double(const Vector&)>& fun, const Vector& z,
                          double h = 1e-6) {
  Vector g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Vector zp = z;
    Vector zm = z;
    zp[i] += h;
    zm[i] -= h;
    g[i] = (fun(zp) - fun(zm)) / (2 * h);
  }
  return g;
}

inline double rel_err(const Vector& a, const Vector& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

// Exact min ||A lam + B w - b|| over lam >= 0, w free, by enumerating the
// columns of A allowed to be nonzero. Each candidate is an unconstrained
// least-squares fit accepted only if its lam part is nonnegative; by
// Caratheodory's theorem some linearly independent subset attains the optimum.
inline double nnls_enumeration(const Matrix& A, const Matrix& B, const Vector& b) {
  const int k = static_cast<int>(A.cols());
  if (b.size() == 0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < k; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    Matrix M(b.size(), static_cast<Eigen::Index>(cols.size()) + B.cols());
    for (std::size_t j = 0; j < cols.size(); ++j) M.col(static_cast<Eigen::Index>(j)) = A.col(cols[j]);
    if (B.cols() > 0) M.rightCols(B.cols()) = B;
    Vector r = -b;
    if (M.cols() > 0) {
      const Vector sol = M.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
      bool ok = true;
      for (std::size_t j = 0; j < cols.size(); ++j) ok = ok && sol[static_cast<Eigen::Index>(j)] >= -1e-12;
      if (!ok) continue;
      r = M * sol - b;
    }
    best = std::min(best, r.norm());
  }
  return best;
}

// Projected gradient (accelerated, with adaptive restart) on the same
// problem after eliminating w through the orthogonal projector onto range(B)'s
// complement, followed by an exact least-squares polish on the detected support.
inline double nnls_projected_gradient(const Matrix& A, const Matrix& B, const Vector& b,
                                      int iters = 200000) {
  if (b.size() == 0) return 0.0;
  Matrix P = Matrix::Identity(b.size(), b.size());
  if (B.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeFullU);
    const double tol = 1e-12 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > tol ? 1 : 0;
    const Matrix U = svd.matrixU().leftCols(rank);
    P -= U * U.transpose();
  }
  const Matrix PA = P * A;
  const Vector Pb = P * b;
  if (A.cols() == 0) return Pb.norm();
  const double L = std::max(1e-300, PA.jacobiSvd().singularValues()[0] * PA.jacobiSvd().singularValues()[0]);
  Vector lam = Vector::Zero(A.cols());
  Vector v = lam;
  double t = 1.0;
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    const Vector grad = PA.transpose() * (PA * v - Pb);
    const Vector next = (v - grad / L).cwiseMax(0.0);
    const double obj = (PA * next - Pb).squaredNorm();
    if (obj > prev_obj) {  // restart momentum
      t = 1.0;
      v = lam;
      prev_obj = std::numeric_limits<double>::infinity();
      continue;
    }
    const double tn = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
    v = next + ((t - 1) / tn) * (next - lam);
    if ((next - lam).norm() <= 1e-15 * std::max(1.0, next.norm())) {
      lam = next;
      break;
    }
    lam = next;
    t = tn;
    prev_obj = obj;
  }
  double best = (PA * lam - Pb).norm();
  // Polish: least squares on the detected support, kept only if nonnegative.
  std::vector<int> support;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (lam[j] > 1e-9) support.push_back(static_cast<int>(j));
  }
  if (!support.empty()) {
    Matrix M(b.size(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) M.col(static_cast<Eigen::Index>(j)) = PA.col(support[j]);
    const Vector sol = M.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(Pb);
    if (sol.minCoeff() >= 0.0) best = std::min(best, (M * sol - Pb).norm());
  }
  return best;
}

// The reduced CC-M system at x, built straight from the definition:
// rows I_pm, lam columns on I_g, mu columns free.
struct ReducedSystem {
  Matrix A;
  Matrix B;
  Vector b;
};

inline ReducedSystem reduced_ccm_system(const CcopProblem& prob, const Vector& x, double tol) {
  std::vector<int> rows;
  std::vector<int> cols;
  for (int i = 0; i < prob.n(); ++i) {
    if (std::abs(x[i]) > tol) rows.push_back(i);
  }
  const Vector gx = prob.ineq(x);
  for (int i = 0; i < prob.m(); ++i) {
    if (std::abs(gx[i]) <= tol) cols.push_back(i);
  }
  const Vector gf = prob.objective_gradient(x);
  const Matrix G = prob.ineq_jacobian(x);
  const Matrix H = prob.eq_jacobian(x);
  ReducedSystem s;
  const auto nr = static_cast<Eigen::Index>(rows.size());
  s.A.resize(nr, static_cast<Eigen::Index>(cols.size()));
  s.B.resize(nr, prob.p());
  s.b.resize(nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    s.b[r] = -gf[rows[r]];
    for (std::size_t c = 0; c < cols.size(); ++c) s.A(r, static_cast<Eigen::Index>(c)) = G(rows[r], cols[c]);
    for (int j = 0; j < prob.p(); ++j) s.B(r, j) = H(rows[r], j);
  }
  return s;
}

// Minimizes fun over a uniform grid on [lo, hi]^d; returns (best value, argmin).
inline std::pair<double, Vector> grid_search(const std::function<double(const Vector&)>& fun, int d,
                                             double lo, double hi, int points) {
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  const double step = (hi - lo) / (points - 1);
  double best = std::numeric_limits<double>::infinity();
  Vector arg(d);
  Vector z(d);
  while (true) {
    for (int i = 0; i < d; ++i) z[i] = lo + step * idx[static_cast<std::size_t>(i)];
    const double v = fun(z);
    if (v < best) {
      best = v;
      arg = z;
    }
    int i = 0;
    while (i < d && ++idx[static_cast<std::size_t>(i)] == points) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
  }
  return {best, arg};
}

}  // namespace ccop::testing
