#include "ccop/salm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ccop {
namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Sign summary of the first-order multiplier estimates at x^k for the trace.
void summarize_signs(const CcopProblem& prob, const Vector& x, const Multipliers& est,
                     double beta_tol, IterationRecord& row) {
  const double pi = std::max({1.0, inf_norm(est.lam), inf_norm(est.mu), inf_norm(est.gam)});
  const Vector gx = prob.ineq(x);
  const Vector hx = prob.eq(x);
  double worst = std::numeric_limits<double>::infinity();
  int triggered = 0;
  auto visit = [&](double mult, double value) {
    if (std::abs(mult) / pi >= beta_tol) {
      ++triggered;
      worst = std::min(worst, mult * value);
    }
  };
  for (int i = 0; i < prob.m(); ++i) visit(est.lam[i], gx[i]);
  for (int j = 0; j < prob.p(); ++j) visit(est.mu[j], hx[j]);
  for (int i = 0; i < prob.n(); ++i) visit(est.gam[i], x[i]);
  row.pam_triggered = triggered;
  row.pam_min_product = triggered > 0 ? worst : 0.0;
}

double x_violation(const CcopProblem& prob, const Vector& x) {
  const Vector gx = prob.ineq(x);
  const Vector hx = prob.eq(x);
  double v = 0.0;
  if (gx.size() > 0) v = std::max(v, gx.cwiseMax(0.0).maxCoeff());
  if (hx.size() > 0) v = std::max(v, hx.cwiseAbs().maxCoeff());
  return v;
}

}  // namespace

double EpsSchedule::at(int k) const {
  return std::max(eps_min, eps0 * std::pow(theta, static_cast<double>(k)));
}

void EpsSchedule::validate() const {
  if (!(eps0 > 0.0) || !(eps_min > 0.0)) throw std::invalid_argument("eps schedule must be positive");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("eps schedule theta must lie in (0,1]");
}

void SalmConfig::validate() const {
  if (!(rho0 > 0.0)) throw std::invalid_argument("rho0 must be positive");
  if (!(tau > 1.0)) throw std::invalid_argument("tau must exceed 1");
  if (!(sigma > 1.0)) throw std::invalid_argument("sigma must exceed 1");
  if (!(tol_feas > 0.0) || !(tol_opt > 0.0) || !(tol_active > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  if (!(rho_max >= rho0)) throw std::invalid_argument("rho_max must be >= rho0");
  if (!safeguard) throw std::invalid_argument("safeguard rule is empty");
  eps.validate();
  bounds.validate();
}

std::string_view to_string(SalmStatus s) {
  switch (s) {
    case SalmStatus::CcmStationary: return "CcmStationary";
    case SalmStatus::Infeasible: return "Infeasible";
    case SalmStatus::RhoLimit: return "RhoLimit";
    case SalmStatus::OuterLimit: return "OuterLimit";
    case SalmStatus::InnerFailure: return "InnerFailure";
  }
  return "Unknown";
}

double penalty_update(double prev_score, double cur_score, double rho, double tau, double sigma,
                      int k) {
  if (k == 1 || prev_score >= tau * cur_score) return rho;
  return sigma * rho;
}

SalmResult solve(const CcopProblem& prob, const Vector& x0, const SalmConfig& cfg) {
  cfg.validate();
  if (x0.size() != prob.n()) throw std::invalid_argument("x0 dimension mismatch");
  if (!x0.allFinite()) throw std::invalid_argument("x0 must be finite");

  SalmResult res;
  RelaxedPoint pt{x0, pair_y_for_x(x0, prob.kappa())};
  Multipliers bar = Multipliers::zeros(prob);
  double rho = cfg.rho0;
  double prev_score = 0.0;
  int fail_streak = 0;
  double fail_rho = 0.0;
  res.status = SalmStatus::OuterLimit;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    IterationRecord row;
    row.k = k;
    row.rho_prev = rho;
    row.eps = cfg.eps.at(k);

    InnerConfig icfg = cfg.inner;
    icfg.eps = row.eps;
    const InnerResult inner = minimize(prob, pt, bar, rho, icfg);
    pt = inner.pt;
    row.inner_iters = inner.iters;
    row.inner_status = inner.status;
    row.inner_grad_norm = inner.grad_norm;
    row.divergence_warning = inner.status == InnerStatus::Diverged;

    const Multipliers est = update_multipliers(prob, pt, bar, rho);
    const PenaltyProgress prog = penalty_progress(prob, pt, bar, rho);
    row.progress_prev = k == 1 ? 0.0 : prev_score;
    row.progress = prog.score;
    const double rho_next = penalty_update(prev_score, prog.score, rho, cfg.tau, cfg.sigma, k);
    row.rho_increased = rho_next != rho;
    row.rho = rho_next;
    prev_score = prog.score;

    bar = cfg.safeguard(est, cfg.bounds);

    row.feas = feasibility(prob, pt, cfg.tol_active);
    row.mult_norm = est.max_abs();
    const Vector xs = project_to_cardinality(pt.x, prob.kappa());
    row.objective = prob.objective(xs);
    row.ccm_residual = ccm_residual(prob, xs, cfg.tol_active).residual;
    summarize_signs(prob, pt.x, est, cfg.diagnostics.beta_tol, row);

    res.trace.rows.push_back(row);
    res.trace.states.push_back({pt, est, bar});
    res.multipliers = est;

    const bool feasible = row.feas.feasible(cfg.tol_feas) && x_violation(prob, xs) <= cfg.tol_feas;
    if (feasible && row.ccm_residual <= cfg.tol_opt) {
      res.status = SalmStatus::CcmStationary;
      break;
    }

    if (inner.status == InnerStatus::Converged) {
      fail_streak = 0;
    } else {
      fail_streak = (fail_streak > 0 && fail_rho == rho) ? fail_streak + 1 : 1;
      fail_rho = rho;
      if (fail_streak >= 2) {
        res.status = SalmStatus::InnerFailure;
        break;
      }
    }

    rho = rho_next;
    if (rho > cfg.rho_max) {
      res.status = feasible ? SalmStatus::RhoLimit : SalmStatus::Infeasible;
      break;
    }
  }

  res.pt = pt;
  res.x_sparse = project_to_cardinality(pt.x, prob.kappa());

  std::vector<SequenceElement> seq;
  seq.reserve(res.trace.states.size());
  for (const auto& s : res.trace.states) seq.push_back({s.pt.x, s.est.lam, s.est.mu, s.est.gam});
  DiagnosticsConfig dcfg = cfg.diagnostics;
  dcfg.tol_active = cfg.tol_active;
  res.certificate = certify(prob, res.x_sparse, seq, dcfg, cfg.tol_opt);
  return res;
}

}  // namespace ccop
