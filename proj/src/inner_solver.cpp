#include "ccop/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace ccop {
namespace {

struct Stacked {
  Vector z;
  double value = 0.0;
  Vector grad;
};

RelaxedPoint split(const Vector& z, int n) { return {z.head(n), z.tail(n)}; }

Stacked evaluate(const CcopProblem& prob, const Vector& z, const Multipliers& bar, double rho) {
  const int n = prob.n();
  const AugLagEval e = auglag_evaluate(prob, split(z, n), bar, rho);
  Stacked s;
  s.z = z;
  s.value = e.value;
  s.grad.resize(2 * n);
  s.grad << e.grad.dx, e.grad.dy;
  return s;
}

// Limited-memory inverse-Hessian model (two-loop recursion). Pairs with
// insufficient curvature are skipped, which keeps the model positive definite
// across the kinks of the plus terms.
class CurvatureMemory {
 public:
  explicit CurvatureMemory(int capacity) : capacity_(capacity) {}

  bool empty() const { return s_.empty(); }
  void clear() {
    s_.clear();
    y_.clear();
  }

  void push(const Vector& s, const Vector& y) {
    if (capacity_ == 0) return;
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    s_.push_back(s);
    y_.push_back(y);
    if (static_cast<int>(s_.size()) > capacity_) {
      s_.pop_front();
      y_.pop_front();
    }
  }

  Vector direction(const Vector& g) const {
    const std::size_t k = s_.size();
    std::vector<double> a(k);
    Vector q = g;
    for (std::size_t i = k; i-- > 0;) {
      a[i] = s_[i].dot(q) / s_[i].dot(y_[i]);
      q -= a[i] * y_[i];
    }
    q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
      const double b = y_[i].dot(q) / s_[i].dot(y_[i]);
      q += (a[i] - b) * s_[i];
    }
    return -q;
  }

 private:
  int capacity_;
  std::deque<Vector> s_;
  std::deque<Vector> y_;
};

}  // namespace

void InnerConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("inner eps must be positive");
  if (max_iters < 0) throw std::invalid_argument("inner max_iters must be >= 0");
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) throw std::invalid_argument("ls_shrink must lie in (0,1)");
  if (!(ls_c1 > 0.0 && ls_c1 < 1.0)) throw std::invalid_argument("ls_c1 must lie in (0,1)");
  if (!(bb_min > 0.0 && bb_min <= bb_max)) throw std::invalid_argument("BB clamp must be ordered");
  if (nonmonotone_window < 1) throw std::invalid_argument("nonmonotone window must be >= 1");
  if (!(trust_radius > 0.0)) throw std::invalid_argument("trust radius must be positive");
  if (stall_iters < 1) throw std::invalid_argument("stall_iters must be >= 1");
  if (lbfgs_memory < 1) throw std::invalid_argument("lbfgs memory must be >= 1");
}

std::string_view to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::Converged: return "Converged";
    case InnerStatus::IterLimit: return "IterLimit";
    case InnerStatus::LineSearchFail: return "LineSearchFail";
    case InnerStatus::Diverged: return "Diverged";
  }
  return "Unknown";
}

std::string_view to_string(InnerMethod m) {
  return m == InnerMethod::Lbfgs ? "lbfgs" : "spectral";
}

InnerResult minimize(const CcopProblem& prob, const RelaxedPoint& start, const Multipliers& bar,
                     double rho, const InnerConfig& cfg) {
  cfg.validate();
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const int n = prob.n();
  if (start.x.size() != n || start.y.size() != n) {
    throw std::invalid_argument("start point dimension mismatch");
  }

  Vector z0(2 * n);
  z0 << start.x, start.y;
  Stacked cur = evaluate(prob, z0, bar, rho);
  Stacked best = cur;

  InnerResult res;
  res.f_evals = 1;
  auto finish = [&](const Stacked& s, InnerStatus status) {
    res.pt = split(s.z, n);
    res.value = s.value;
    res.grad_norm = s.grad.norm();
    res.status = status;
    return res;
  };

  if (cur.grad.norm() <= cfg.eps) return finish(cur, InnerStatus::Converged);

  std::deque<double> window{cur.value};
  const double ginf = cur.grad.cwiseAbs().maxCoeff();
  double alpha = std::clamp(1.0 / ginf, cfg.bb_min, cfg.bb_max);
  CurvatureMemory memory(cfg.method == InnerMethod::Lbfgs ? cfg.lbfgs_memory : 0);
  double stall_ref = best.value;
  int stalled = 0;

  while (res.iters < cfg.max_iters) {
    Vector d = memory.empty() ? Vector(-alpha * cur.grad) : memory.direction(cur.grad);
    double slope = cur.grad.dot(d);
    if (!(slope < 0.0)) {
      // Stale curvature pairs can produce an ascent direction; fall back.
      memory.clear();
      d = -alpha * cur.grad;
      slope = cur.grad.dot(d);
    }
    const double ref = *std::max_element(window.begin(), window.end());

    bool accepted = false;
    Stacked trial;
    double t = 1.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt, t *= cfg.ls_shrink) {
      try {
        trial = evaluate(prob, cur.z + t * d, bar, rho);
      } catch (const EvaluationError&) {
        ++res.f_evals;
        continue;  // overflow far out along the ray; shorten the step
      }
      ++res.f_evals;
      if (trial.value <= ref + cfg.ls_c1 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return finish(best, InnerStatus::LineSearchFail);
    ++res.iters;

    if (trial.z.cwiseAbs().maxCoeff() > cfg.trust_radius) {
      return finish(best, InnerStatus::Diverged);
    }

    const Vector s = trial.z - cur.z;
    const Vector yv = trial.grad - cur.grad;
    const double sy = s.dot(yv);
    if (sy > 0.0) alpha = std::clamp(s.squaredNorm() / sy, cfg.bb_min, cfg.bb_max);
    memory.push(s, yv);

    cur = std::move(trial);
    if (cur.value <= best.value) best = cur;
    if (cur.grad.norm() <= cfg.eps) return finish(cur, InnerStatus::Converged);
    // No decrease above roundoff for a while: the line search cannot make
    // progress at working precision (typical once rho is huge).
    if (best.value < stall_ref - 1e-14 * std::max(1.0, std::abs(stall_ref))) {
      stall_ref = best.value;
      stalled = 0;
    } else if (++stalled >= cfg.stall_iters) {
      return finish(best, InnerStatus::LineSearchFail);
    }

    window.push_back(cur.value);
    if (static_cast<int>(window.size()) > cfg.nonmonotone_window) window.pop_front();
  }
  return finish(best, InnerStatus::IterLimit);
}

}  // namespace ccop
