#pragma once

#include <functional>

#include "ccop/problem.hpp"

namespace ccop {

/// Multipliers of the relaxation's five constraint blocks:
/// g <= 0 (lam >= 0), h = 0 (mu), x o y = 0 (gam),
/// n - kappa - e'y <= 0 (delta >= 0), y <= e (eta >= 0).
struct Multipliers {
  Vector lam;
  Vector mu;
  Vector gam;
  double delta = 0.0;
  Vector eta;

  static Multipliers zeros(const CcopProblem& prob);
  /// max(||lam||_inf, ||mu||_inf, ||gam||_inf, delta, ||eta||_inf)
  double max_abs() const;
};

/// Boxes the safeguarded multipliers are kept in. Defaults are wide enough
/// that the method behaves like a classical augmented Lagrangian unless the
/// caller tightens them.
struct SafeguardBounds {
  double lam_max = 1e20;
  double mu_min = -1e20;
  double mu_max = 1e20;
  double gam_min = -1e20;
  double gam_max = 1e20;
  double delta_max = 1e20;
  double eta_max = 1e20;

  void validate() const;
};

/// The blocks compared by the penalty-increase test.
struct PenaltyProgress {
  Vector u;     // min{-g(x), lam_bar / rho}
  Vector hval;  // h(x)
  Vector comp;  // x o y
  double v = 0.0;  // min{-(n - kappa - e'y), delta_bar / rho}
  Vector r;     // min{-(y - e), eta_bar / rho}
  double score = 0.0;  // max of the five Euclidean block norms
};

double auglag_value(const CcopProblem& prob, const RelaxedPoint& pt, const Multipliers& bar,
                    double rho);

struct AugLagGradient {
  Vector dx;
  Vector dy;
  double norm() const;
};

AugLagGradient auglag_gradient(const CcopProblem& prob, const RelaxedPoint& pt,
                               const Multipliers& bar, double rho);

/// Value and gradient from one set of callback evaluations.
struct AugLagEval {
  double value = 0.0;
  AugLagGradient grad;
};
AugLagEval auglag_evaluate(const CcopProblem& prob, const RelaxedPoint& pt,
                           const Multipliers& bar, double rho);

/// First-order multiplier estimates at pt:
///   lam = (rho g + lam_bar)_+, mu = rho h + mu_bar, gam = rho x o y + gam_bar,
///   delta = (rho (n - kappa - e'y) + delta_bar)_+, eta = (rho (y - e) + eta_bar)_+.
Multipliers update_multipliers(const CcopProblem& prob, const RelaxedPoint& pt,
                               const Multipliers& bar, double rho);

PenaltyProgress penalty_progress(const CcopProblem& prob, const RelaxedPoint& pt,
                                 const Multipliers& bar, double rho);

/// Componentwise clamp of every block into its safeguard box.
Multipliers project_safeguards(const Multipliers& est, const SafeguardBounds& bounds);

/// Pluggable safeguard update; the default is project_safeguards.
using SafeguardRule = std::function<Multipliers(const Multipliers&, const SafeguardBounds&)>;

}  // namespace ccop
