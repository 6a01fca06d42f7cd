#include "ccop/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ccop {
namespace {

Vector solve_passive(const Matrix& A, const Vector& b, const std::vector<int>& passive) {
  Matrix Ap(A.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(passive[k]);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Ap);
  return cod.solve(b);
}

}  // namespace

NnlsResult nnls(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size()) throw std::invalid_argument("nnls: row mismatch");
  const Eigen::Index ncols = A.cols();
  NnlsResult out;
  out.x = Vector::Zero(ncols);
  if (ncols == 0 || A.rows() == 0) {
    out.residual = b.size() ? b.norm() : 0.0;
    out.converged = true;
    return out;
  }

  const double anorm = A.cwiseAbs().colwise().sum().maxCoeff();
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * anorm *
                     static_cast<double>(std::max(A.rows(), ncols));
  const int max_iter = 3 * static_cast<int>(ncols) + 30;

  std::vector<char> in_passive(static_cast<std::size_t>(ncols), 0);
  Vector& x = out.x;
  Vector w = A.transpose() * (b - A * x);

  while (out.iterations < max_iter) {
    Eigen::Index t = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < ncols; ++j) {
      if (!in_passive[j] && w[j] > wmax) {
        wmax = w[j];
        t = j;
      }
    }
    if (t < 0) {
      out.converged = true;
      break;
    }
    in_passive[t] = 1;

    // Inner loop: keep the passive solution strictly positive.
    while (true) {
      ++out.iterations;
      std::vector<int> passive;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (in_passive[j]) passive.push_back(static_cast<int>(j));
      }
      const Vector s = solve_passive(A, b, passive);
      bool all_positive = true;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        if (s[static_cast<Eigen::Index>(k)] <= tol) all_positive = false;
      }
      if (all_positive) {
        x.setZero();
        for (std::size_t k = 0; k < passive.size(); ++k) x[passive[k]] = s[static_cast<Eigen::Index>(k)];
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double sk = s[static_cast<Eigen::Index>(k)];
        const double xk = x[passive[k]];
        if (sk <= tol) alpha = std::min(alpha, xk / (xk - sk));
      }
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const int j = passive[k];
        x[j] += alpha * (s[static_cast<Eigen::Index>(k)] - x[j]);
        if (x[j] <= tol) {
          x[j] = 0.0;
          in_passive[j] = 0;
        }
      }
      if (std::none_of(in_passive.begin(), in_passive.end(), [](char c) { return c != 0; })) break;
      if (out.iterations >= max_iter) break;
    }
    w = A.transpose() * (b - A * x);
  }
  out.residual = (A * x - b).norm();
  return out;
}

NnlsResult nnls_with_free(const Matrix& A, const Matrix& B, const Vector& b) {
  if (A.rows() != b.size() || B.rows() != b.size()) {
    throw std::invalid_argument("nnls_with_free: row mismatch");
  }
  if (B.cols() == 0) return nnls(A, b);
  if (b.size() == 0) {
    NnlsResult empty;
    empty.x = Vector::Zero(A.cols());
    empty.w = Vector::Zero(B.cols());
    empty.converged = true;
    return empty;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(B);
  const Eigen::Index rank = qr.rank();
  const Matrix Q = qr.householderQ() * Matrix::Identity(B.rows(), B.rows());
  const Matrix Qr = Q.leftCols(rank);
  const Matrix proj = Matrix::Identity(B.rows(), B.rows()) - Qr * Qr.transpose();

  NnlsResult out = nnls(proj * A, proj * b);
  const Vector rhs = b - A * out.x;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(B);
  out.w = cod.solve(rhs);
  out.residual = (A * out.x + B * out.w - b).norm();
  return out;
}

}  // namespace ccop
