#pragma once

#include "ccop/problem.hpp"

namespace ccop {

struct NnlsResult {
  Vector x;                // x >= 0
  Vector w;                // free block (empty for plain NNLS)
  double residual = 0.0;   // ||A x + B w - b||_2
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set solve of min ||A x - b|| s.t. x >= 0.
/// Sub-problems on the passive set use a complete orthogonal decomposition,
/// so rank-deficient columns give a minimum-norm minimizer rather than an error.
NnlsResult nnls(const Matrix& A, const Vector& b);

/// min ||A x + B w - b|| over x >= 0 and free w. The free block is removed
/// exactly by projecting onto the orthogonal complement of range(B); the
/// remaining problem is a plain NNLS.
NnlsResult nnls_with_free(const Matrix& A, const Matrix& B, const Vector& b);

}  // namespace ccop
