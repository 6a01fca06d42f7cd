#include <doctest.h>

#include <random>

#include "ccop/auglag.hpp"
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

// Single inequality g(x) = c (constant), no objective curvature.
CcopProblem constant_ineq(double c) {
  ProblemFunctions f;
  f.f = [](const Vector&) { return 0.0; };
  f.grad_f = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  f.g = [c](const Vector&) { return Vector::Constant(1, c); };
  f.jac_g = [](const Vector& x) -> Matrix { return Matrix::Zero(x.size(), 1); };
  return CcopProblem("const_g", Dimensions{2, 1, 0, 1}, f);
}

Multipliers random_bar(std::mt19937_64& rng, const CcopProblem& prob) {
  Multipliers b;
  b.lam = t::random_vector(rng, prob.m(), 0, 3);
  b.mu = t::random_vector(rng, prob.p(), -3, 3);
  b.gam = t::random_vector(rng, prob.n(), -3, 3);
  b.delta = t::random_vector(rng, 1, 0, 3)[0];
  b.eta = t::random_vector(rng, prob.n(), 0, 3);
  return b;
}

}  // namespace

TEST_CASE("auglag_value hand-evaluated cases") {
  const auto p2 = t::example_3_2();
  const Multipliers z = Multipliers::zeros(p2);
  CHECK(auglag_value(p2, {vec({0, 0}), vec({1, 1})}, z, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(auglag_value(p2, {vec({0, 0}), vec({0, 0})}, z, 1.0) == doctest::Approx(1.5).epsilon(1e-15));

  // No g/h, x o y = 0, y = e, kappa = n - 1: every block vanishes.
  for (double rho : {0.1, 1.0, 1e4}) {
    CHECK(auglag_value(p2, {vec({0.3, 0.0}), vec({0.0, 1.0})}, z, rho) ==
          p2.objective(vec({0.3, 0.0})));
  }
}

TEST_CASE("update_multipliers formulas") {
  const auto p = constant_ineq(1.0);
  Multipliers bar = Multipliers::zeros(p);
  bar.lam = vec({2.0});
  const Multipliers a = update_multipliers(p, {vec({0, 0}), vec({1, 0})}, bar, 3.0);
  CHECK(a.lam[0] == 5.0);

  const auto p2 = t::example_3_2();
  Multipliers b2 = Multipliers::zeros(p2);
  b2.gam = vec({0.1, 0.0});
  const Multipliers g = update_multipliers(p2, {vec({1, 0}), vec({0.2, 1})}, b2, 10.0);
  CHECK(g.gam[0] == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(g.gam[1] == 0.0);

  const auto p1 = t::example_3_1();
  const Multipliers f = update_multipliers(p1, {vec({1, 1, 0}), vec({0, 0, 1})}, Multipliers::zeros(p1), 7.0);
  CHECK(f.max_abs() == 0.0);
}

TEST_CASE("penalty_progress") {
  const auto p = constant_ineq(-1.0);
  Multipliers bar = Multipliers::zeros(p);
  bar.lam = vec({2.0});
  const PenaltyProgress pp = penalty_progress(p, {vec({0, 0}), vec({1, 0})}, bar, 1.0);
  CHECK(pp.u[0] == 1.0);

  const PenaltyProgress z = penalty_progress(p, {vec({0, 0}), vec({1, 0})}, Multipliers::zeros(p), 1.0);
  CHECK(z.score == 0.0);

  const auto p1 = t::example_3_1();
  CHECK(penalty_progress(p1, {vec({1, 1, 0}), vec({0, 0, 1})}, Multipliers::zeros(p1), 1.0).score == 0.0);
}

TEST_CASE("penalty_progress score is the max of Euclidean block norms") {
  std::mt19937_64 rng(17);
  for (int d = 0; d < 50; ++d) {
    const auto prob = t::random_problem(rng, 4, 2, 1, 2);
    const RelaxedPoint pt{t::random_vector(rng, 4, -2, 2), t::random_vector(rng, 4, -1, 2)};
    const Multipliers bar = random_bar(rng, prob);
    const PenaltyProgress pp = penalty_progress(prob, pt, bar, 2.5);
    const double expect = std::max({pp.u.norm(), pp.hval.norm(), pp.comp.norm(), std::abs(pp.v), pp.r.norm()});
    CHECK(pp.score == expect);
  }
}

TEST_CASE("project_safeguards clamps and is idempotent") {
  const auto p = constant_ineq(0.0);
  SafeguardBounds b;
  b.lam_max = 1e6;
  b.mu_min = -2;
  Multipliers m = Multipliers::zeros(p);
  m.lam = vec({1e9});
  CHECK(project_safeguards(m, b).lam[0] == 1e6);

  ProblemFunctions f;
  f.f = [](const Vector&) { return 0.0; };
  f.grad_f = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  f.h = [](const Vector&) { return Vector::Zero(1); };
  f.jac_h = [](const Vector& x) -> Matrix { return Matrix::Zero(x.size(), 1); };
  const CcopProblem ph("h", Dimensions{2, 0, 1, 1}, f);
  Multipliers mh = Multipliers::zeros(ph);
  mh.mu = vec({-5});
  CHECK(project_safeguards(mh, b).mu[0] == -2.0);

  std::mt19937_64 rng(2);
  const auto prob = t::random_problem(rng, 4, 2, 2, 2);
  SafeguardBounds tight{1.0, -0.5, 0.5, -1.0, 1.0, 0.7, 0.2};
  for (int d = 0; d < 50; ++d) {
    Multipliers r = random_bar(rng, prob);
    r.mu *= 3;
    const Multipliers once = project_safeguards(r, tight);
    const Multipliers twice = project_safeguards(once, tight);
    CHECK(once.lam == twice.lam);
    CHECK(once.mu == twice.mu);
    CHECK(once.gam == twice.gam);
    CHECK(once.delta == twice.delta);
    CHECK(once.eta == twice.eta);
  }
  // Inside the boxes nothing moves.
  Multipliers inside = Multipliers::zeros(prob);
  inside.lam.setConstant(0.5);
  const Multipliers same = project_safeguards(inside, tight);
  CHECK(same.lam == inside.lam);
}

TEST_CASE("safeguard bounds validation") {
  SafeguardBounds b;
  b.mu_min = 1;
  b.mu_max = 0;
  CHECK_THROWS(b.validate());
}

TEST_CASE("gradient at a penalty-free point is (grad f, 0)") {
  const auto p = constant_ineq(-1.0);
  // x o y = 0, e'y > n - kappa, y < e strictly, g < 0.
  const RelaxedPoint pt{vec({0, 0}), vec({0.9, 0.9})};
  const AugLagGradient g = auglag_gradient(p, pt, Multipliers::zeros(p), 4.0);
  CHECK(g.dx == Vector::Zero(2));
  CHECK(g.dy == Vector::Zero(2));
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(99);
  for (int d = 0; d < 100; ++d) {
    const int n = 2 + d % 5;
    const auto prob = t::random_problem(rng, n, 2, 1, 1);
    const RelaxedPoint pt{t::random_vector(rng, n, -1.5, 1.5), t::random_vector(rng, n, -0.5, 1.5)};
    const Multipliers bar = random_bar(rng, prob);
    const double rho = std::exp(t::random_vector(rng, 1, 0, std::log(100.0))[0]);
    const AugLagGradient g = auglag_gradient(prob, pt, bar, rho);
    Vector z(2 * n);
    z << pt.x, pt.y;
    Vector an(2 * n);
    an << g.dx, g.dy;
    const Vector fd = t::fd_gradient(
        [&](const Vector& v) { return auglag_value(prob, {v.head(n), v.tail(n)}, bar, rho); }, z);
    CHECK(t::rel_err(an, fd) <= 1e-5);
  }
}

TEST_CASE("updated multipliers reproduce the x-gradient") {
  std::mt19937_64 rng(123);
  for (int d = 0; d < 100; ++d) {
    const int n = 2 + d % 6;
    const auto prob = t::random_problem(rng, n, 3, 2, 1);
    const RelaxedPoint pt{t::random_vector(rng, n, -2, 2), t::random_vector(rng, n, -1, 2)};
    const Multipliers bar = random_bar(rng, prob);
    const double rho = 0.5 + 10 * d;
    const AugLagGradient g = auglag_gradient(prob, pt, bar, rho);
    const Multipliers e = update_multipliers(prob, pt, bar, rho);
    const Vector rebuilt = prob.objective_gradient(pt.x) + prob.ineq_jacobian(pt.x) * e.lam +
                           prob.eq_jacobian(pt.x) * e.mu + e.gam.cwiseProduct(pt.y);
    CHECK((g.dx - rebuilt).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, rebuilt.cwiseAbs().maxCoeff()));
    CHECK((e.lam.array() >= 0).all());
    CHECK(e.delta >= 0);
    CHECK((e.eta.array() >= 0).all());
  }
}

TEST_CASE("value is nondecreasing in rho when the multipliers are zero") {
  std::mt19937_64 rng(8);
  for (int d = 0; d < 50; ++d) {
    const auto prob = t::random_problem(rng, 3, 2, 1, 1);
    const RelaxedPoint pt{t::random_vector(rng, 3, -2, 2), t::random_vector(rng, 3, -1, 2)};
    const Multipliers z = Multipliers::zeros(prob);
    double prev = auglag_value(prob, pt, z, 1e-3);
    for (double rho = 1e-2; rho < 1e5; rho *= 3) {
      const double v = auglag_value(prob, pt, z, rho);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("evaluate bundles value and gradient") {
  std::mt19937_64 rng(4);
  const auto prob = t::random_problem(rng, 4, 1, 1, 2);
  const RelaxedPoint pt{t::random_vector(rng, 4), t::random_vector(rng, 4)};
  const Multipliers bar = random_bar(rng, prob);
  const AugLagEval e = auglag_evaluate(prob, pt, bar, 3.0);
  CHECK(e.value == auglag_value(prob, pt, bar, 3.0));
  CHECK(e.grad.dx == auglag_gradient(prob, pt, bar, 3.0).dx);
  CHECK(e.grad.dy == auglag_gradient(prob, pt, bar, 3.0).dy);
}
