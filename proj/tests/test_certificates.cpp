#include <doctest.h>

#include <random>

#include "ccop/certificates.hpp"
#include "ccop/nnls.hpp"
#include "test_support.hpp"

using namespace ccop;
namespace t = ccop::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

// Shifts the inequalities of base so that the rows flagged in mask are
// exactly active at x0.
CcopProblem with_active_rows(const CcopProblem& base, const Vector& x0, const std::vector<bool>& mask) {
  Vector shift = Vector::Zero(base.m());
  const Vector g0 = base.ineq(x0);
  for (int i = 0; i < base.m(); ++i) shift[i] = mask[static_cast<std::size_t>(i)] ? g0[i] : std::abs(g0[i]) + 1.0;
  return t::shift_ineq(base, shift);
}

// Independent check of strong stationarity for the pair (x, z).
bool is_ccs_pair(const CcopProblem& prob, const Vector& x, const Vector& z, const CcmResidualReport& r,
                 double tol) {
  const int n = prob.n();
  if ((x.cwiseProduct(z)).cwiseAbs().maxCoeff() > tol) return false;
  if ((z.array() > 1.0 + tol).any()) return false;
  if (z.sum() < n - prob.kappa() - tol) return false;
  for (int i = 0; i < n; ++i) {
    if (std::abs(z[i]) <= tol && std::abs(r.gam[i]) > tol) return false;
  }
  const Vector res = prob.objective_gradient(x) + prob.ineq_jacobian(x) * r.lam + prob.eq_jacobian(x) * r.mu + r.gam;
  return res.norm() <= 1e-6;
}

std::vector<SequenceElement> bilinear_sequence(double a, int K) {
  std::vector<SequenceElement> seq;
  for (int k = 1; k <= K; ++k) {
    seq.push_back({vec({a, 1.0, (1 - a) / k}), vec({double(k)}), Vector(0), vec({0, 0, -k * a})});
  }
  return seq;
}

std::vector<SequenceElement> one_sparse_sequence(int K) {
  std::vector<SequenceElement> seq;
  for (int k = 1; k <= K; ++k) {
    const double v = 1.0 / (k + 1);
    seq.push_back({vec({v, v}), Vector(0), Vector(0), vec({1 - v, 1 - v})});
  }
  return seq;
}

}  // namespace

TEST_CASE("nnls matches enumeration, including rank-deficient systems") {
  std::mt19937_64 rng(31);
  for (int d = 0; d < 200; ++d) {
    const int rows = 1 + d % 6;
    const int cols = 1 + d % 5;
    Matrix A = t::random_matrix(rng, rows, cols);
    if (d % 4 == 0 && cols > 1) A.col(cols - 1) = A.col(0) * 2.0;  // duplicate direction
    const Matrix B = t::random_matrix(rng, rows, d % 3);
    const Vector b = t::random_vector(rng, rows, -2, 2);
    const NnlsResult r = nnls_with_free(A, B, b);
    CHECK(r.converged);
    CHECK((r.x.array() >= 0).all());
    CHECK(std::abs(r.residual - (A * r.x + B * r.w - b).norm()) <= 1e-12);
    CHECK(std::abs(r.residual - t::nnls_enumeration(A, B, b)) <= 1e-10);
  }
}

TEST_CASE("ccm_residual on the bilinear example") {
  const auto prob = t::example_3_1();
  const CcmResidualReport opt = ccm_residual(prob, vec({1, 1, 0}));
  CHECK(opt.residual == 0.0);
  CHECK(opt.lam.cwiseAbs().maxCoeff() == 0.0);
  CHECK(opt.gam.cwiseAbs().maxCoeff() == 0.0);

  for (double a : {0.25, 0.5, 0.75}) {
    const Vector x = vec({a, 1, 0});
    const CcmResidualReport r = ccm_residual(prob, x);
    CHECK(std::abs(r.residual - std::abs(a - 1)) <= 1e-8);
    const auto sys = t::reduced_ccm_system(prob, x, kDefaultTolActive);
    CHECK(std::abs(r.residual - t::nnls_enumeration(sys.A, sys.B, sys.b)) <= 1e-10);
    CHECK(std::abs(r.residual - t::nnls_projected_gradient(sys.A, sys.B, sys.b)) <= 1e-10);
  }
}

TEST_CASE("ccm_residual is zero at the origin of the one-sparse example") {
  const auto prob = t::example_3_2();
  const CcmResidualReport r = ccm_residual(prob, vec({0, 0}));
  CHECK(r.residual == 0.0);
  CHECK(r.gam == vec({1, 1}));
}

TEST_CASE("report invariants and oracle agreement on random instances") {
  std::mt19937_64 rng(77);
  for (int d = 0; d < 150; ++d) {
    const int n = 3 + d % 4;
    const int kappa = 1 + d % (n - 1);
    const auto base = t::random_problem(rng, n, 3, d % 3, kappa);
    Vector x = t::random_vector(rng, n, -2, 2);
    for (int i = kappa; i < n; ++i) x[i] = 0.0;
    std::vector<bool> mask{d % 2 == 0, d % 3 == 0, true};
    const auto prob = with_active_rows(base, x, mask);
    const CcmResidualReport r = ccm_residual(prob, x);
    CHECK((r.lam.array() >= 0).all());
    for (int i = 0; i < prob.m(); ++i) {
      if (!mask[static_cast<std::size_t>(i)]) CHECK(r.lam[i] == 0.0);
    }
    for (int i : r.sets.nonzero_x) CHECK(r.gam[i] == 0.0);
    const Vector res = prob.objective_gradient(x) + prob.ineq_jacobian(x) * r.lam + prob.eq_jacobian(x) * r.mu + r.gam;
    CHECK(std::abs(res.norm() - r.residual) <= 1e-10);

    const auto sys = t::reduced_ccm_system(prob, x, kDefaultTolActive);
    CHECK(std::abs(r.residual - t::nnls_enumeration(sys.A, sys.B, sys.b)) <= 1e-10);
    CHECK(std::abs(r.residual - t::nnls_projected_gradient(sys.A, sys.B, sys.b)) <= 1e-10);
  }
}

TEST_CASE("forcing more multipliers to zero never lowers the residual") {
  std::mt19937_64 rng(5);
  for (int d = 0; d < 100; ++d) {
    const Matrix A = t::random_matrix(rng, 6, 3);
    const Matrix B = t::random_matrix(rng, 6, 1);
    const Vector b = t::random_vector(rng, 6);
    // Freeing a row (gam_i unconstrained) drops it from the system.
    double prev = 0.0;
    for (int rows = 1; rows <= 6; ++rows) {
      const double r = nnls_with_free(A.topRows(rows), B.topRows(rows), b.head(rows)).residual;
      CHECK(r >= prev - 1e-12);
      prev = r;
    }
  }
}

TEST_CASE("no nonzero coordinates and no constraints means zero residual") {
  std::mt19937_64 rng(1);
  for (int d = 0; d < 20; ++d) {
    const auto prob = t::random_problem(rng, 4, 0, 0, 2);
    CHECK(ccm_residual(prob, Vector::Zero(4)).residual == 0.0);
  }
}

TEST_CASE("strongly stationary pair from a CC-M report") {
  const auto p2 = t::example_3_2();
  const Vector x = vec({1, 0});
  const CcmResidualReport r = ccm_residual(p2, x);
  CHECK(r.residual == 0.0);
  CHECK(r.gam == vec({0, 1}));
  const auto z = ccs_from_ccm(p2, x, r, 1);
  REQUIRE(z.has_value());
  CHECK(*z == vec({0, 1}));
  CHECK(is_ccs_pair(p2, x, *z, r, 1e-12));

  // Origin: every slot is in I_0 so z = e, and gam needs no zeros.
  const CcmResidualReport r0 = ccm_residual(p2, vec({0, 0}));
  const auto z0 = ccs_from_ccm(p2, vec({0, 0}), r0, 1);
  REQUIRE(z0.has_value());
  CHECK(is_ccs_pair(p2, vec({0, 0}), *z0, r0, 1e-12));

  // Support exactly kappa with gam = 0: the paired y works.
  const auto p1 = t::example_3_1();
  const CcmResidualReport r1 = ccm_residual(p1, vec({1, 1, 0}));
  const auto z1 = ccs_from_ccm(p1, vec({1, 1, 0}), r1, 2);
  REQUIRE(z1.has_value());
  CHECK(*z1 == pair_y_for_x(vec({1, 1, 0}), 2));

  // Not a CC-M point: nothing to build.
  const Vector xs = vec({0.5, 1, 0});
  CHECK_FALSE(ccs_from_ccm(p1, xs, ccm_residual(p1, xs), 2).has_value());
  // Too many nonzeros for kappa.
  const CcmResidualReport rd = ccm_residual(p2, vec({1, 1}));
  CHECK_FALSE(ccs_from_ccm(p2, vec({1, 1}), rd, 1, 1e300).has_value());
}

TEST_CASE("bilinear sequence violates the gamma sign condition") {
  const auto prob = t::example_3_1();
  for (double a : {0.25, 0.5, 0.75}) {
    const auto seq = bilinear_sequence(a, 1000);
    const SequenceDiagnostics d = sequence_diagnostics(prob, seq, vec({a, 1, 0}));
    CHECK(d.cond_a == Verdict::Pass);
    CHECK(d.cond_b == Verdict::Pass);
    CHECK(d.cond_c == Verdict::Pass);
    CHECK(d.cond_e == Verdict::Fail);
    CHECK(d.ccpam == Verdict::Fail);
    CHECK(d.ccam == Verdict::Pass);
    bool found = false;
    for (const auto& c : d.components) {
      if (c.block == Block::Gam && c.index == 2) {
        found = true;
        CHECK(c.triggered);
        CHECK(c.verdict == Verdict::Fail);
        CHECK(std::abs(c.worst_product + a * (1 - a)) <= 1e-9);
      }
    }
    CHECK(found);
    for (double pi : d.pi) CHECK(pi >= 1.0);
  }
}

TEST_CASE("one-sparse witness sequence passes every condition") {
  const auto prob = t::example_3_2();
  const SequenceDiagnostics d = sequence_diagnostics(prob, one_sparse_sequence(1000), vec({0, 0}));
  CHECK(d.cond_a == Verdict::Pass);
  CHECK(d.cond_b == Verdict::Pass);
  CHECK(d.cond_c == Verdict::Pass);
  CHECK(d.cond_d == Verdict::Pass);
  CHECK(d.cond_e == Verdict::Pass);
  CHECK(d.ccpam == Verdict::Pass);
  CHECK(d.ccam == Verdict::Pass);
  for (double r : d.residuals) CHECK(r == 0.0);
  for (double pi : d.pi) CHECK(pi == 1.0);
}

TEST_CASE("constant sequence at a CC-M point passes") {
  const auto p1 = t::example_3_1();
  const Certificate c = certify(p1, vec({1, 1, 0}), {});
  CHECK(c.ccm.residual == 0.0);
  CHECK(c.ccpam_ok == Verdict::Pass);
  CHECK(c.ccam_ok == Verdict::Pass);

  const auto p2 = t::example_3_2();
  for (const Vector& x : {vec({1, 0}), vec({0, 1}), vec({0, 0})}) {
    const Certificate c2 = certify(p2, x, {});
    CHECK(c2.ccm.residual == 0.0);
    CHECK(c2.ccpam_ok == Verdict::Pass);
  }
}

TEST_CASE("pam Pass implies am Pass on random sequences") {
  std::mt19937_64 rng(404);
  int pam_pass = 0;
  int pam_fail = 0;
  auto check_implication = [&](const SequenceDiagnostics& diag) {
    if (diag.ccpam == Verdict::Pass) {
      ++pam_pass;
      CHECK(diag.ccam == Verdict::Pass);
    }
    if (diag.ccpam == Verdict::Fail) ++pam_fail;
    if (diag.ccam != Verdict::Pass) CHECK(diag.ccpam != Verdict::Pass);
  };
  // Generic perturbed sequences on random instances.
  for (int d = 0; d < 100; ++d) {
    const auto prob = t::random_problem(rng, 3, 1, 1, 2);
    Vector xs = t::random_vector(rng, 3);
    xs[2] = 0.0;
    std::vector<SequenceElement> seq;
    const Vector dir = t::random_vector(rng, 3);
    const Vector lam_dir = t::random_vector(rng, 1, 0, 2);
    const Vector mu_dir = t::random_vector(rng, 1);
    const Vector gam_dir = t::random_vector(rng, 3);
    for (int k = 1; k <= 40; ++k) {
      const double s = d % 2 == 0 ? 1.0 : static_cast<double>(k);
      seq.push_back({xs + dir / k, lam_dir * s, mu_dir * s, gam_dir * s});
    }
    check_implication(sequence_diagnostics(prob, seq, xs));
  }
  // Exact stationary families x^k = v/(k+1), gam^k = e - x^k on the
  // one-sparse example: products gam_i x_i have the sign of v_i.
  const auto p2 = t::example_3_2();
  for (int d = 0; d < 100; ++d) {
    const Vector v = t::random_vector(rng, 2, d % 2 == 0 ? 0.1 : -1.0, 1.0);
    std::vector<SequenceElement> seq;
    for (int k = 1; k <= 60; ++k) {
      const Vector x = v / (k + 1.0);
      seq.push_back({x, Vector(0), Vector(0), Vector::Ones(2) - x});
    }
    check_implication(sequence_diagnostics(p2, seq, Vector::Zero(2)));
  }
  CHECK(pam_pass > 0);
  CHECK(pam_fail > 0);
}

TEST_CASE("sequence diagnostics rejects malformed input") {
  const auto prob = t::example_3_2();
  CHECK_THROWS(sequence_diagnostics(prob, {}, vec({0, 0})));
  CHECK_THROWS(sequence_diagnostics(prob, {{vec({0, 0}), vec({1}), Vector(0), vec({0, 0})}}, vec({0, 0})));
}
