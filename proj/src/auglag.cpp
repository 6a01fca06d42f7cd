#include "ccop/auglag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccop {
namespace {

void check_args(const CcopProblem& prob, const RelaxedPoint& pt, const Multipliers& bar,
                double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (pt.x.size() != prob.n() || pt.y.size() != prob.n()) {
    throw std::invalid_argument("relaxed point dimension mismatch");
  }
  if (bar.lam.size() != prob.m() || bar.mu.size() != prob.p() || bar.gam.size() != prob.n() ||
      bar.eta.size() != prob.n()) {
    throw std::invalid_argument("multiplier block sizes do not match the problem");
  }
}

double block_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.norm(); }

double plus(double v) { return v > 0.0 ? v : 0.0; }

// Residual of the cardinality row, n - kappa - e'y.
double card_row(const CcopProblem& prob, const Vector& y) {
  return static_cast<double>(prob.n() - prob.kappa()) - y.sum();
}

}  // namespace

Multipliers Multipliers::zeros(const CcopProblem& prob) {
  Multipliers z;
  z.lam = Vector::Zero(prob.m());
  z.mu = Vector::Zero(prob.p());
  z.gam = Vector::Zero(prob.n());
  z.delta = 0.0;
  z.eta = Vector::Zero(prob.n());
  return z;
}

double Multipliers::max_abs() const {
  double v = std::abs(delta);
  for (const Vector* b : {&lam, &mu, &gam, &eta}) {
    if (b->size() > 0) v = std::max(v, b->cwiseAbs().maxCoeff());
  }
  return v;
}

void SafeguardBounds::validate() const {
  if (!(mu_min < mu_max) || !(gam_min < gam_max)) {
    throw std::invalid_argument("safeguard bounds: require mu_min < mu_max and gam_min < gam_max");
  }
  if (!(lam_max > 0.0) || !(delta_max > 0.0) || !(eta_max > 0.0)) {
    throw std::invalid_argument("safeguard bounds: lam_max, delta_max, eta_max must be positive");
  }
}

double AugLagGradient::norm() const {
  return std::sqrt(dx.squaredNorm() + dy.squaredNorm());
}

Multipliers update_multipliers(const CcopProblem& prob, const RelaxedPoint& pt,
                               const Multipliers& bar, double rho) {
  check_args(prob, pt, bar, rho);
  Multipliers out;
  out.lam = (rho * prob.ineq(pt.x) + bar.lam).cwiseMax(0.0);
  out.mu = rho * prob.eq(pt.x) + bar.mu;
  out.gam = rho * pt.x.cwiseProduct(pt.y) + bar.gam;
  out.delta = plus(rho * card_row(prob, pt.y) + bar.delta);
  out.eta = (rho * (pt.y.array() - 1.0).matrix() + bar.eta).cwiseMax(0.0);
  return out;
}

AugLagEval auglag_evaluate(const CcopProblem& prob, const RelaxedPoint& pt,
                           const Multipliers& bar, double rho) {
  check_args(prob, pt, bar, rho);
  // Every penalty block of L is (rho/2)||(shifted residual)||^2, and
  // rho * shifted residual is exactly the first-order multiplier estimate.
  // Writing the value as f + sum ||estimate||^2 / (2 rho) and the gradient
  // in terms of the estimates keeps both consistent with update_multipliers.
  const Multipliers est = update_multipliers(prob, pt, bar, rho);

  AugLagEval out;
  const double f = prob.objective(pt.x);
  const double penalty = est.lam.squaredNorm() + est.mu.squaredNorm() +
                         est.gam.squaredNorm() + est.delta * est.delta +
                         est.eta.squaredNorm();
  out.value = f + penalty / (2.0 * rho);

  Vector dx = prob.objective_gradient(pt.x);
  if (prob.m() > 0) dx += prob.ineq_jacobian(pt.x) * est.lam;
  if (prob.p() > 0) dx += prob.eq_jacobian(pt.x) * est.mu;
  dx += est.gam.cwiseProduct(pt.y);

  Vector dy = est.gam.cwiseProduct(pt.x);
  dy.array() -= est.delta;
  dy += est.eta;

  out.grad.dx = std::move(dx);
  out.grad.dy = std::move(dy);
  if (!std::isfinite(out.value) || !out.grad.dx.allFinite() || !out.grad.dy.allFinite()) {
    throw EvaluationError("augmented Lagrangian evaluation overflowed");
  }
  return out;
}

double auglag_value(const CcopProblem& prob, const RelaxedPoint& pt, const Multipliers& bar,
                    double rho) {
  check_args(prob, pt, bar, rho);
  const Vector gx = prob.ineq(pt.x);
  const Vector hx = prob.eq(pt.x);
  const double f = prob.objective(pt.x);
  const double s_g = (gx + bar.lam / rho).cwiseMax(0.0).squaredNorm();
  const double s_h = (hx + bar.mu / rho).squaredNorm();
  const double s_c = (pt.x.cwiseProduct(pt.y) + bar.gam / rho).squaredNorm();
  const double card = plus(card_row(prob, pt.y) + bar.delta / rho);
  const double s_b = ((pt.y.array() - 1.0).matrix() + bar.eta / rho).cwiseMax(0.0).squaredNorm();
  const double v = f + 0.5 * rho * (s_g + s_h + s_c + card * card + s_b);
  if (!std::isfinite(v)) throw EvaluationError("augmented Lagrangian value overflowed");
  return v;
}

AugLagGradient auglag_gradient(const CcopProblem& prob, const RelaxedPoint& pt,
                               const Multipliers& bar, double rho) {
  return auglag_evaluate(prob, pt, bar, rho).grad;
}

PenaltyProgress penalty_progress(const CcopProblem& prob, const RelaxedPoint& pt,
                                 const Multipliers& bar, double rho) {
  check_args(prob, pt, bar, rho);
  PenaltyProgress out;
  out.u = (-prob.ineq(pt.x)).cwiseMin(bar.lam / rho);
  out.hval = prob.eq(pt.x);
  out.comp = pt.x.cwiseProduct(pt.y);
  out.v = std::min(-card_row(prob, pt.y), bar.delta / rho);
  out.r = (1.0 - pt.y.array()).matrix().cwiseMin(bar.eta / rho);
  out.score = std::max({block_norm(out.u), block_norm(out.hval), block_norm(out.comp),
                        std::abs(out.v), block_norm(out.r)});
  return out;
}

Multipliers project_safeguards(const Multipliers& est, const SafeguardBounds& bounds) {
  bounds.validate();
  Multipliers out;
  out.lam = est.lam.cwiseMax(0.0).cwiseMin(bounds.lam_max);
  out.mu = est.mu.cwiseMax(bounds.mu_min).cwiseMin(bounds.mu_max);
  out.gam = est.gam.cwiseMax(bounds.gam_min).cwiseMin(bounds.gam_max);
  out.delta = std::clamp(est.delta, 0.0, bounds.delta_max);
  out.eta = est.eta.cwiseMax(0.0).cwiseMin(bounds.eta_max);
  return out;
}

}  // namespace ccop
