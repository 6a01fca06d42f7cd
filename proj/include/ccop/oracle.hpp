#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ccop/salm.hpp"

namespace ccop {

struct OracleConfig {
  int max_n = 20;              // hard cap on enumeration size
  int random_starts = 5;       // per support, in addition to the zero vector
  std::uint64_t seed = 0;
  double start_scale = 2.0;    // random starts are uniform in [-scale, scale]
  double tol_feas = 1e-6;
  SalmConfig salm;             // used for every restricted solve
};

struct SupportResult {
  std::vector<int> support;
  Vector x;                    // full-length, zero off the support
  double objective = 0.0;
  double infeasibility = 0.0;  // max(||g_+||_inf, ||h||_inf)
  bool feasible = false;
  int failed_starts = 0;       // restricted solves that threw
};

struct OracleResult {
  Vector best_x;
  double best_f = 0.0;
  std::vector<int> best_support;
  bool found_feasible = false;
  std::vector<SupportResult> per_support;
  int enumerated = 0;
};

/// Global minimizer by brute force: every support S with |S| <= kappa gets the
/// restricted program min f s.t. g <= 0, h = 0, x off S = 0, solved by the
/// augmented Lagrangian machinery from the zero vector and seeded random
/// starts. Throws std::invalid_argument when n exceeds cfg.max_n.
OracleResult enumerate_supports(const CcopProblem& prob, const OracleConfig& cfg = {});

enum class MatchKind { GlobalMatch, LocalOnly, Worse };
std::string_view to_string(MatchKind k);

struct OracleValidation {
  MatchKind kind = MatchKind::Worse;
  double gap = 0.0;  // f(candidate) - best_f
};

/// GlobalMatch: feasible and within tol of best_f. LocalOnly: CC-M certified
/// (residual <= tol) but worse than best_f + tol. Worse otherwise.
OracleValidation validate_against_oracle(const CcopProblem& prob, const Vector& x_candidate,
                                         const OracleResult& oracle, double tol = 1e-6);

}  // namespace ccop
