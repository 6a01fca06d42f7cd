#pragma once

#include <string_view>

#include "ccop/auglag.hpp"

namespace ccop {

/// Search direction. Both use the same nonmonotone Armijo backtracking.
enum class InnerMethod {
  Lbfgs,             // limited-memory quasi-Newton on the (x, y) stack
  SpectralGradient,  // Barzilai-Borwein scaled steepest descent
};

struct InnerConfig {
  InnerMethod method = InnerMethod::Lbfgs;
  int lbfgs_memory = 10;
  double eps = 1e-6;             // target for ||grad L||_2 over (x, y)
  int max_iters = 20000;
  double ls_shrink = 0.5;
  double ls_c1 = 1e-4;
  double bb_min = 1e-10;
  double bb_max = 1e10;
  int nonmonotone_window = 10;
  int max_backtracks = 80;
  double trust_radius = 1e8;     // infinity-norm bound on (x, y)
  int stall_iters = 100;         // iterations without a new best value before giving up

  void validate() const;
};

enum class InnerStatus { Converged, IterLimit, LineSearchFail, Diverged };

std::string_view to_string(InnerStatus s);
std::string_view to_string(InnerMethod m);

struct InnerResult {
  RelaxedPoint pt;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  InnerStatus status = InnerStatus::IterLimit;
  int f_evals = 0;
};

/// Approximately minimizes L(., ., bar, rho) over (x, y) with nonmonotone
/// Armijo backtracking along L-BFGS or Barzilai-Borwein directions. The BB
/// step (clamped to [bb_min, bb_max]) also scales the fallback gradient step.
/// Stops as soon as ||grad L|| <= cfg.eps. LineSearchFail covers both
/// backtracking exhaustion and stall_iters iterations without decreasing the
/// best value by more than roundoff. On any other exit the lowest-value
/// point seen is returned, so L at the result never exceeds L at start.
InnerResult minimize(const CcopProblem& prob, const RelaxedPoint& start, const Multipliers& bar,
                     double rho, const InnerConfig& cfg);

}  // namespace ccop
