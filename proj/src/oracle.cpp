#include "ccop/oracle.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace ccop {
namespace {

Vector embed(const Vector& xs, const std::vector<int>& support, int n) {
  Vector x = Vector::Zero(n);
  for (std::size_t k = 0; k < support.size(); ++k) x[support[k]] = xs[static_cast<Eigen::Index>(k)];
  return x;
}

Matrix restrict_rows(const Matrix& J, const std::vector<int>& support) {
  Matrix out(static_cast<Eigen::Index>(support.size()), J.cols());
  for (std::size_t k = 0; k < support.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = J.row(support[k]);
  return out;
}

Vector restrict(const Vector& v, const std::vector<int>& support) {
  Vector out(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[support[k]];
  return out;
}

// The program in the support coordinates only; the cardinality bound is
// vacuous (kappa = |S|).
CcopProblem restricted_problem(const CcopProblem& prob, const std::vector<int>& support) {
  const int n = prob.n();
  ProblemFunctions fns;
  fns.f = [&prob, support, n](const Vector& xs) { return prob.objective(embed(xs, support, n)); };
  fns.grad_f = [&prob, support, n](const Vector& xs) {
    return restrict(prob.objective_gradient(embed(xs, support, n)), support);
  };
  if (prob.m() > 0) {
    fns.g = [&prob, support, n](const Vector& xs) { return prob.ineq(embed(xs, support, n)); };
    fns.jac_g = [&prob, support, n](const Vector& xs) {
      return restrict_rows(prob.ineq_jacobian(embed(xs, support, n)), support);
    };
  }
  if (prob.p() > 0) {
    fns.h = [&prob, support, n](const Vector& xs) { return prob.eq(embed(xs, support, n)); };
    fns.jac_h = [&prob, support, n](const Vector& xs) {
      return restrict_rows(prob.eq_jacobian(embed(xs, support, n)), support);
    };
  }
  const int s = static_cast<int>(support.size());
  return CcopProblem(prob.name() + "/restricted", Dimensions{s, prob.m(), prob.p(), s}, fns,
                     prob.level_bounded());
}

double infeasibility(const CcopProblem& prob, const Vector& x) {
  const Vector gx = prob.ineq(x);
  const Vector hx = prob.eq(x);
  double v = 0.0;
  if (gx.size() > 0) v = std::max(v, gx.cwiseMax(0.0).maxCoeff());
  if (hx.size() > 0) v = std::max(v, hx.cwiseAbs().maxCoeff());
  return v;
}

// Calls visit(support) for every subset of {0..n-1} of size 0..kmax, by size
// then lexicographically.
template <typename Visit>
void for_each_support(int n, int kmax, Visit&& visit) {
  for (int size = 0; size <= kmax; ++size) {
    std::vector<int> s(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) s[static_cast<std::size_t>(i)] = i;
    while (true) {
      visit(s);
      int i = size - 1;
      while (i >= 0 && s[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++s[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace

OracleResult enumerate_supports(const CcopProblem& prob, const OracleConfig& cfg) {
  if (prob.n() > cfg.max_n) {
    throw std::invalid_argument("oracle: n = " + std::to_string(prob.n()) +
                                " exceeds the enumeration cap " + std::to_string(cfg.max_n));
  }
  const int n = prob.n();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-cfg.start_scale, cfg.start_scale);

  OracleResult out;
  out.best_f = std::numeric_limits<double>::infinity();
  out.best_x = Vector::Zero(n);

  for_each_support(n, prob.kappa(), [&](const std::vector<int>& support) {
    SupportResult sr;
    sr.support = support;
    sr.objective = std::numeric_limits<double>::infinity();
    sr.infeasibility = std::numeric_limits<double>::infinity();

    auto consider = [&](const Vector& x) {
      const double viol = infeasibility(prob, x);
      const double f = prob.objective(x);
      const bool feas = viol <= cfg.tol_feas;
      // Prefer feasible points, then lower objective, then lower violation.
      const bool better = (feas && !sr.feasible) ||
                          (feas == sr.feasible && (feas ? f < sr.objective : viol < sr.infeasibility));
      if (better) {
        sr.x = x;
        sr.objective = f;
        sr.infeasibility = viol;
        sr.feasible = feas;
      }
    };

    if (support.empty()) {
      consider(Vector::Zero(n));
    } else {
      const CcopProblem sub = restricted_problem(prob, support);
      const int s = static_cast<int>(support.size());
      std::vector<Vector> starts{Vector::Zero(s)};
      for (int r = 0; r < cfg.random_starts; ++r) {
        Vector x0(s);
        for (int i = 0; i < s; ++i) x0[i] = unif(rng);
        starts.push_back(x0);
      }
      for (const Vector& x0 : starts) {
        try {
          const SalmResult run = solve(sub, x0, cfg.salm);
          consider(embed(run.pt.x, support, n));
        } catch (const EvaluationError&) {
          ++sr.failed_starts;
        }
      }
    }

    if (sr.feasible && sr.objective < out.best_f) {
      out.best_f = sr.objective;
      out.best_x = sr.x;
      out.best_support = sr.support;
      out.found_feasible = true;
    }
    out.per_support.push_back(std::move(sr));
    ++out.enumerated;
  });
  return out;
}

std::string_view to_string(MatchKind k) {
  switch (k) {
    case MatchKind::GlobalMatch: return "GlobalMatch";
    case MatchKind::LocalOnly: return "LocalOnly";
    case MatchKind::Worse: return "Worse";
  }
  return "Unknown";
}

OracleValidation validate_against_oracle(const CcopProblem& prob, const Vector& x_candidate,
                                         const OracleResult& oracle, double tol) {
  OracleValidation v;
  const double f = prob.objective(x_candidate);
  v.gap = f - oracle.best_f;
  const bool feasible = infeasibility(prob, x_candidate) <= tol &&
                        support_size(x_candidate, kDefaultTolActive) <= prob.kappa();
  if (feasible && f <= oracle.best_f + tol) {
    v.kind = MatchKind::GlobalMatch;
  } else if (feasible && ccm_residual(prob, x_candidate).residual <= tol) {
    v.kind = MatchKind::LocalOnly;
  } else {
    v.kind = MatchKind::Worse;
  }
  return v;
}

}  // namespace ccop
