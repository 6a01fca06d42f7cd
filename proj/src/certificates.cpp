#include "ccop/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccop/nnls.hpp"

namespace ccop {
namespace {

Verdict worse(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Pass;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vector stationarity_residual(const CcopProblem& prob, const SequenceElement& e) {
  Vector r = prob.objective_gradient(e.x) + e.gam;
  if (prob.m() > 0) r += prob.ineq_jacobian(e.x) * e.lam;
  if (prob.p() > 0) r += prob.eq_jacobian(e.x) * e.mu;
  return r;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

std::string_view to_string(Block b) {
  switch (b) {
    case Block::Lam: return "lam";
    case Block::Mu: return "mu";
    case Block::Gam: return "gam";
  }
  return "unknown";
}

CcmResidualReport ccm_residual(const CcopProblem& prob, const Vector& x, double tol_active) {
  CcmResidualReport rep;
  rep.sets = classify_indices(prob, x, tol_active);
  const Vector gf = prob.objective_gradient(x);
  const Matrix G = prob.ineq_jacobian(x);
  const Matrix H = prob.eq_jacobian(x);

  // gam is free on I_0, so those rows vanish exactly; what remains is an
  // NNLS in lam (restricted to I_g) with mu free, over the I_pm rows.
  const auto& rows = rep.sets.nonzero_x;
  const auto& cols = rep.sets.active_g;
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  Matrix A(nr, nc);
  Matrix B(nr, prob.p());
  Vector b(nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    b[r] = -gf[rows[r]];
    for (Eigen::Index c = 0; c < nc; ++c) A(r, c) = G(rows[r], cols[c]);
    if (prob.p() > 0) B.row(r) = H.row(rows[r]);
  }
  const NnlsResult fit = nnls_with_free(A, B, b);

  rep.lam = Vector::Zero(prob.m());
  for (Eigen::Index c = 0; c < nc; ++c) rep.lam[cols[c]] = fit.x[c];
  rep.mu = prob.p() > 0 ? fit.w : Vector(Vector::Zero(0));

  Vector r = gf;
  if (prob.m() > 0) r += G * rep.lam;
  if (prob.p() > 0) r += H * rep.mu;
  rep.gam = Vector::Zero(prob.n());
  for (int i : rep.sets.zero_x) rep.gam[i] = -r[i];
  rep.residual = (r + rep.gam).norm();
  return rep;
}

std::optional<Vector> ccs_from_ccm(const CcopProblem& prob, const Vector& x,
                                   const CcmResidualReport& report, int kappa, double tol_opt) {
  if (x.size() != prob.n()) throw std::invalid_argument("dimension mismatch between x and n");
  if (!(report.residual <= tol_opt)) return std::nullopt;
  const int n = prob.n();
  Vector z = Vector::Zero(n);
  for (int i : report.sets.zero_x) z[i] = 1.0;
  if (z.sum() < static_cast<double>(n - kappa)) return std::nullopt;
  // Strong stationarity: gam must vanish wherever z does.
  for (int i = 0; i < n; ++i) {
    if (z[i] == 0.0 && std::abs(report.gam[i]) > report.sets.tol_active) return std::nullopt;
  }
  return z;
}

SequenceDiagnostics sequence_diagnostics(const CcopProblem& prob,
                                         const std::vector<SequenceElement>& seq,
                                         const Vector& x_star, const DiagnosticsConfig& cfg) {
  if (seq.empty()) throw std::invalid_argument("sequence_diagnostics: empty sequence");
  const int n = prob.n();
  const int m = prob.m();
  const int p = prob.p();
  const int N = static_cast<int>(seq.size());
  for (const auto& e : seq) {
    if (e.x.size() != n || e.lam.size() != m || e.mu.size() != p || e.gam.size() != n) {
      throw std::invalid_argument("sequence_diagnostics: element dimension mismatch");
    }
  }

  SequenceDiagnostics d;
  const int tail_len =
      std::min(N, std::max(cfg.tail_min, static_cast<int>(std::ceil(cfg.tail_fraction * N))));
  d.tail_begin = N - tail_len;
  const IndexSets star = classify_indices(prob, x_star, cfg.tol_active);

  const int width = m + p + n;
  d.pi.resize(static_cast<std::size_t>(N));
  d.residuals.resize(static_cast<std::size_t>(N));
  d.normalized.resize(N, width);
  d.products.resize(N, width);
  Matrix thresholded(N, width);
  std::vector<double> dist(static_cast<std::size_t>(N));

  auto zeroed = [&](double v) { return std::abs(v) <= cfg.tol_active ? 0.0 : v; };

  for (int k = 0; k < N; ++k) {
    const auto& e = seq[static_cast<std::size_t>(k)];
    const double pi = std::max({1.0, inf_norm(e.lam), inf_norm(e.mu), inf_norm(e.gam)});
    d.pi[static_cast<std::size_t>(k)] = pi;
    d.residuals[static_cast<std::size_t>(k)] = inf_norm(stationarity_residual(prob, e));
    dist[static_cast<std::size_t>(k)] = inf_norm(e.x - x_star);
    const Vector gx = prob.ineq(e.x);
    const Vector hx = prob.eq(e.x);
    for (int i = 0; i < m; ++i) {
      d.normalized(k, i) = std::abs(e.lam[i]) / pi;
      d.products(k, i) = e.lam[i] * gx[i];
      thresholded(k, i) = e.lam[i] * zeroed(gx[i]);
    }
    for (int j = 0; j < p; ++j) {
      d.normalized(k, m + j) = std::abs(e.mu[j]) / pi;
      d.products(k, m + j) = e.mu[j] * hx[j];
      thresholded(k, m + j) = e.mu[j] * zeroed(hx[j]);
    }
    for (int i = 0; i < n; ++i) {
      d.normalized(k, m + p + i) = std::abs(e.gam[i]) / pi;
      d.products(k, m + p + i) = e.gam[i] * e.x[i];
      thresholded(k, m + p + i) = e.gam[i] * zeroed(e.x[i]);
    }
  }
  d.final_distance = dist.back();
  d.final_residual = d.residuals.back();

  // (a): distance and stationarity residual small at the end of the tail and
  // not growing across it (second half of the tail bounded by the first).
  auto trending_down = [&](const std::vector<double>& v) {
    const int mid = d.tail_begin + tail_len / 2;
    const double early = *std::max_element(v.begin() + d.tail_begin, v.begin() + std::max(mid, d.tail_begin + 1));
    const double late = *std::max_element(v.begin() + mid, v.end());
    return v.back() <= cfg.conv_tol && late <= early;
  };
  d.cond_a = trending_down(dist) && trending_down(d.residuals) ? Verdict::Pass : Verdict::Fail;

  // (b): support pattern of the multipliers relative to x_star.
  std::vector<char> lam_allowed(static_cast<std::size_t>(m), 0);
  for (int i : star.active_g) lam_allowed[static_cast<std::size_t>(i)] = 1;
  bool b_ok = true;
  for (int k = d.tail_begin; k < N && b_ok; ++k) {
    const auto& e = seq[static_cast<std::size_t>(k)];
    for (int i = 0; i < m; ++i) {
      if (e.lam[i] < -cfg.tol_active) b_ok = false;
      if (!lam_allowed[static_cast<std::size_t>(i)] && std::abs(e.lam[i]) > cfg.tol_active) b_ok = false;
    }
    for (int i : star.nonzero_x) {
      if (std::abs(e.gam[i]) > cfg.tol_active) b_ok = false;
    }
  }
  d.cond_b = b_ok ? Verdict::Pass : Verdict::Fail;

  // (c)-(e): sign conditions on components whose normalized size persists.
  Verdict cond[3] = {Verdict::Pass, Verdict::Pass, Verdict::Pass};
  for (int c = 0; c < width; ++c) {
    ComponentSign cs;
    if (c < m) {
      cs.block = Block::Lam;
      cs.index = c;
    } else if (c < m + p) {
      cs.block = Block::Mu;
      cs.index = c - m;
    } else {
      cs.block = Block::Gam;
      cs.index = c - m - p;
    }
    cs.min_normalized = d.normalized.col(c).tail(tail_len).minCoeff();
    cs.worst_product = d.products.col(c).tail(tail_len).minCoeff();
    cs.triggered = cs.min_normalized >= cfg.beta_tol;
    bool negative_when_large = false;
    bool negative_anywhere = false;
    for (int k = d.tail_begin; k < N; ++k) {
      if (thresholded(k, c) <= -cfg.alpha_tol) {
        negative_anywhere = true;
        if (d.normalized(k, c) >= cfg.beta_tol) negative_when_large = true;
      }
    }
    if (cs.triggered) {
      cs.verdict = negative_anywhere ? Verdict::Fail : Verdict::Pass;
    } else {
      cs.verdict = negative_when_large ? Verdict::Inconclusive : Verdict::Pass;
    }
    auto& slot = cond[static_cast<int>(cs.block)];
    slot = worse(slot, cs.verdict);
    d.components.push_back(cs);
  }
  d.cond_c = cond[0];
  d.cond_d = cond[1];
  d.cond_e = cond[2];

  const bool am = d.cond_a == Verdict::Pass && d.cond_b == Verdict::Pass;
  d.ccam = am ? Verdict::Pass : Verdict::Inconclusive;
  const Verdict signs = worse(worse(d.cond_c, d.cond_d), d.cond_e);
  if (signs == Verdict::Fail) {
    d.ccpam = Verdict::Fail;
  } else if (am && signs == Verdict::Pass) {
    d.ccpam = Verdict::Pass;
  } else {
    d.ccpam = Verdict::Inconclusive;
  }
  return d;
}

Certificate certify(const CcopProblem& prob, const Vector& x,
                    const std::vector<SequenceElement>& seq, const DiagnosticsConfig& cfg,
                    double tol_opt) {
  Certificate cert;
  cert.ccm = ccm_residual(prob, x, cfg.tol_active);
  cert.ccs_pair = ccs_from_ccm(prob, x, cert.ccm, prob.kappa(), tol_opt);
  if (seq.empty()) {
    const std::vector<SequenceElement> constant{{x, cert.ccm.lam, cert.ccm.mu, cert.ccm.gam}};
    cert.diagnostics = sequence_diagnostics(prob, constant, x, cfg);
  } else {
    cert.diagnostics = sequence_diagnostics(prob, seq, x, cfg);
  }
  cert.ccam_ok = cert.diagnostics.ccam;
  cert.ccpam_ok = cert.diagnostics.ccpam;
  return cert;
}

}  // namespace ccop
