#pragma once

#include <string_view>
#include <vector>

#include "ccop/auglag.hpp"
#include "ccop/certificates.hpp"
#include "ccop/inner_solver.hpp"

namespace ccop {

/// Geometric tolerance schedule eps_k = max(eps_min, eps0 * theta^k).
struct EpsSchedule {
  double eps0 = 1.0;
  double theta = 0.5;
  double eps_min = 1e-9;

  double at(int k) const;
  void validate() const;
};

struct SalmConfig {
  double rho0 = 1.0;
  double tau = 2.0;    // required progress factor in the penalty test
  double sigma = 10.0; // penalty growth factor
  EpsSchedule eps;
  SafeguardBounds bounds;
  SafeguardRule safeguard = project_safeguards;
  double tol_feas = 1e-6;
  double tol_opt = 1e-6;
  int max_outer = 200;
  double rho_max = 1e12;
  double tol_active = kDefaultTolActive;
  InnerConfig inner;          // eps is overwritten by the schedule
  DiagnosticsConfig diagnostics;

  void validate() const;
};

enum class SalmStatus { CcmStationary, Infeasible, RhoLimit, OuterLimit, InnerFailure };
std::string_view to_string(SalmStatus s);

/// One outer iteration k.
struct IterationRecord {
  int k = 0;
  double rho_prev = 0.0;       // penalty used in the subproblem
  double rho = 0.0;            // penalty after the update test
  double eps = 0.0;
  FeasibilityReport feas;      // of (x^k, y^k)
  double mult_norm = 0.0;      // ||Lambda^k||_inf (unsafeguarded estimates)
  double progress_prev = 0.0;  // score at k-1 (0 at k = 1)
  double progress = 0.0;       // score at k
  bool rho_increased = false;
  int inner_iters = 0;
  InnerStatus inner_status = InnerStatus::Converged;
  double inner_grad_norm = 0.0;
  double objective = 0.0;      // f at the cardinality-projected point
  double ccm_residual = 0.0;   // CC-M residual at the projected point
  int pam_triggered = 0;       // multiplier components with |.|/pi >= beta_tol
  double pam_min_product = 0.0; // smallest sign product among them (0 if none)
  bool divergence_warning = false;
};

/// Full state at the end of an outer iteration.
struct OuterState {
  RelaxedPoint pt;
  Multipliers est;   // first-order estimates from update_multipliers
  Multipliers bar;   // safeguarded multipliers for the next subproblem
};

struct RunTrace {
  std::vector<IterationRecord> rows;
  std::vector<OuterState> states;
};

struct SalmResult {
  RelaxedPoint pt;
  Vector x_sparse;
  Multipliers multipliers;
  RunTrace trace;
  SalmStatus status = SalmStatus::OuterLimit;
  Certificate certificate;
};

/// Keeps rho when k = 1 or prev_score >= tau * cur_score, otherwise sigma * rho.
double penalty_update(double prev_score, double cur_score, double rho, double tau, double sigma,
                      int k);

/// Safeguarded augmented Lagrangian method on the (x, y) relaxation.
///
/// Each outer iteration approximately minimizes L at the current safeguarded
/// multipliers and penalty, forms the first-order estimates, applies the
/// penalty test, and projects the estimates into the safeguard boxes. The
/// run stops once the relaxed point is feasible and the cardinality-projected
/// x certifies CC-M stationarity, or on penalty/iteration/inner limits.
SalmResult solve(const CcopProblem& prob, const Vector& x0, const SalmConfig& cfg = {});

}  // namespace ccop
