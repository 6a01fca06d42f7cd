#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ccop/problem.hpp"

namespace ccop {

/// Result of fitting Mordukhovich-type multipliers at a point x:
///   min ||grad f + grad g lam + grad h mu + gam||
///   s.t. lam >= 0, lam_i = 0 off I_g(x), gam_i = 0 on I_pm(x).
struct CcmResidualReport {
  double residual = 0.0;
  Vector lam;
  Vector mu;
  Vector gam;
  IndexSets sets;
};

CcmResidualReport ccm_residual(const CcopProblem& prob, const Vector& x,
                               double tol_active = kDefaultTolActive);

/// Builds z with (x, z) strongly stationary given a CC-M report at x:
/// z_i = 1 on I_0(x) and 0 on I_pm(x), so gam_i = 0 wherever z_i = 0 and
/// x o z = 0. Returns nullopt when that z violates e'z >= n - kappa (x is not
/// kappa-sparse under the report's threshold) or the report is not a CC-M
/// certificate at tol_opt.
std::optional<Vector> ccs_from_ccm(const CcopProblem& prob, const Vector& x,
                                   const CcmResidualReport& report, int kappa,
                                   double tol_opt = 1e-6);

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict v);

/// One element (x^k, lam^k, mu^k, gam^k) of a multiplier sequence.
struct SequenceElement {
  Vector x;
  Vector lam;
  Vector mu;
  Vector gam;
};

struct DiagnosticsConfig {
  double tol_active = kDefaultTolActive;
  double beta_tol = 1e-3;   // normalized magnitude that counts as "limit > 0"
  double alpha_tol = 1e-12; // margin separating positive, zero and negative products
  double tail_fraction = 0.25;
  int tail_min = 10;
  double conv_tol = 1e-3;   // final distance / residual bound for condition (a)
};

enum class Block { Lam, Mu, Gam };
std::string_view to_string(Block b);

/// Sign behaviour of one multiplier component over the tail window.
struct ComponentSign {
  Block block = Block::Lam;
  int index = 0;
  double min_normalized = 0.0;  // min over tail of |multiplier| / pi_k
  bool triggered = false;       // min_normalized >= beta_tol
  double worst_product = 0.0;   // min over tail of multiplier * constraint value (raw)
  Verdict verdict = Verdict::Pass;
};

struct SequenceDiagnostics {
  std::vector<double> pi;  // pi_k = ||(1, lam, mu, gam)||_inf, per element
  Matrix normalized;       // elements x (m + p + n): |multiplier| / pi_k
  Matrix products;         // elements x (m + p + n): multiplier * constraint value
  int tail_begin = 0;
  double final_distance = 0.0;
  double final_residual = 0.0;
  std::vector<double> residuals;  // ||grad f + grad g lam + grad h mu + gam||_inf per element
  Verdict cond_a = Verdict::Pass;
  Verdict cond_b = Verdict::Pass;
  Verdict cond_c = Verdict::Pass;
  Verdict cond_d = Verdict::Pass;
  Verdict cond_e = Verdict::Pass;
  std::vector<ComponentSign> components;
  Verdict ccam = Verdict::Pass;
  Verdict ccpam = Verdict::Pass;
};

/// Finite-sequence check of the approximate Mordukhovich conditions (a)-(b)
/// and the sign conditions (c)-(e) at x_star, evaluated over the tail window.
///
/// A component is triggered when its normalized magnitude stays >= beta_tol
/// throughout the tail. Its sign product (with the constraint value zeroed
/// below tol_active, matching the active-set threshold) must then be
/// positive or numerically zero; a product <= -alpha_tol on a triggered
/// component is a Fail. Components that dip below beta_tol inside the tail
/// while showing a negative product are Inconclusive.
SequenceDiagnostics sequence_diagnostics(const CcopProblem& prob,
                                         const std::vector<SequenceElement>& seq,
                                         const Vector& x_star,
                                         const DiagnosticsConfig& cfg = {});

struct Certificate {
  CcmResidualReport ccm;
  std::optional<Vector> ccs_pair;
  Verdict ccam_ok = Verdict::Inconclusive;
  Verdict ccpam_ok = Verdict::Inconclusive;
  SequenceDiagnostics diagnostics;
};

/// Full certificate at x using the supplied sequence; with an empty sequence
/// the constant sequence at x with its fitted multipliers is checked.
Certificate certify(const CcopProblem& prob, const Vector& x,
                    const std::vector<SequenceElement>& seq, const DiagnosticsConfig& cfg = {},
                    double tol_opt = 1e-6);

}  // namespace ccop
