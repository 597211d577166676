#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fingersel/errors.hpp"
#include "fingersel/outerp.hpp"

using namespace fsel;
constexpr cplx I1{0.0, 1.0};

namespace {
Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::not_implemented;
}

// The nonlinear boundary term whose quadratic remainder is G8: G8(p) = Phi(V0 + p) + Qtilde p.
cplx Phi(cplx V, cplx xi, double g) {
  const cplx H = eval_H(xi, g), Hb = eval_Hbar(xi, g);
  const cplx sq = sqrt_near(V * V - 4.0, eval_sqrtV0sq_minus4(xi, g));
  return (-(V * V * Hb + 2.0 * (H - Hb)) + Hb * V * sq) / 2.0;
}

const Params& prm035() {
  static const Params p = params_from_gamma_eps(1.0, 0.35);
  return p;
}
const OuterContour& contour035() {
  static const OuterContour c = build_contour(prm035(), {});
  return c;
}
}  // namespace

TEST_CASE("G8 vanishes quadratically at p = 0") {
  const Params prm = params_from_gamma_eps(1.5, 0.3);
  CHECK(eval_G8(0.0, -1.0, prm) == cplx(0.0));
  const cplx r6 = eval_G8(1e-6, -1.0, prm) / 1e-12, r7 = eval_G8(1e-7, -1.0, prm) / 1e-14;
  CHECK(std::abs(r6 - r7) < 1e-4 * std::abs(r7));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, contour035().xi.size() - 1);
  for (int k = 0; k < 20; ++k) {
    const cplx xi = contour035().xi[pick(rng)];
    const cplx a = eval_G8(1e-5, xi, prm035()) / 1e-10, b = eval_G8(1e-6, xi, prm035()) / 1e-12;
    CHECK(std::abs(a - b) < 1e-3 * std::abs(b));
  }
}

TEST_CASE("G8 against the defining nonlinearity") {
  for (double g : {0.8, 1.0, 1.5})
    for (cplx xi : {cplx(-1.0), cplx(-0.3, -0.2), cplx(-2.0, -0.5), cplx(-0.5)}) {
      const Params prm = params_from_gamma_eps(g, 0.3);
      CHECK(std::abs(Phi(eval_V0(xi, g), xi, g)) < 1e-14);
      for (cplx p : {cplx(0.1), cplx(0.05, 0.02), cplx(1e-3)}) {
        const cplx oracle = Phi(eval_V0(xi, g) + p, xi, g) + eval_Qtilde(xi, g) * p;
        CHECK(std::abs(eval_G8(p, xi, prm) - oracle) < 1e-9 * std::abs(p) + 1e-8 * std::abs(oracle));
      }
    }
}

TEST_CASE("G8 limit at the tip with p = beta xi") {
  // the quadratic remainder tends to -gamma^2 beta as xi -> 0 along the contour, with an O(sqrt xi) error
  for (double g : {1.0, 1.5}) {
    const Params prm = params_from_gamma_eps(g, 0.3);
    const cplx beta(0.3, 0.1);
    double prev = 1.0;
    for (double r : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const cplx xi = -r;
      const double dev = std::abs(eval_G8(beta * xi, xi, prm) + g * g * beta);
      CHECK(dev < prev);
      prev = dev;
    }
    CHECK(prev < 5.0 * std::sqrt(1e-5) * std::abs(g * g * beta));
  }
}

TEST_CASE("G6 and G7 with the p = 0 data") {
  const Params& prm = prm035();
  const cplx xi(-0.1, -0.05);
  const auto [g6, g7] = eval_G6_G7(0.0, xi, prm, 0.0, 0.2);
  CHECK(g7 == cplx(0.0));
  const double g = prm.gamma;
  const cplx V0 = eval_V0(xi, g), r = -2.0 * I1 * xi / sroot(xi, g);
  CHECK(std::abs(g6 - 0.2 * (-V0 * V0 + V0 * r + 2.0) / 2.0) < 1e-14);
  CHECK(std::abs(sqrt_near(V0 * V0 - 4.0, r) - r) < 1e-14);
}

TEST_CASE("contour: descent gate and P increments") {
  const auto& c = contour035();
  CHECK(c.xi.size() == 2000);
  CHECK(c.xi.front() == cplx(-1e4));
  CHECK(c.xi.back() == cplx(-0.05));
  for (std::size_t j : {std::size_t{0}, std::size_t{700}, std::size_t{1500}, std::size_t{1999}})
    CHECK(std::abs(c.P[j] - eval_P(c.xi[j], 1.0)) < 1e-10 * std::max(1.0, std::abs(c.P[j])));
  OuterConfig rl;
  rl.contour = ContourKind::rl_joined;
  CHECK(code_of([&] { build_contour(prm035(), rl); }) == Errc::not_descent);
}

TEST_CASE("U operator: zero, linearity, manufactured solution") {
  const auto& c = contour035();
  const Params& prm = prm035();
  const std::size_t n = c.xi.size();
  const auto z = apply_U(std::vector<cplx>(n, 0.0), c, prm);
  for (auto v : z) CHECK(v == cplx(0.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<cplx> a(n), b(n), ab(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = {nd(rng), nd(rng)};
    b[j] = {nd(rng), nd(rng)};
    ab[j] = a[j] + b[j];
  }
  const auto ua = apply_U(a, c, prm), ub = apply_U(b, c, prm), uab = apply_U(ab, c, prm);
  double m = 0.0, s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    m = std::max(m, std::abs(uab[j] - ua[j] - ub[j]));
    s = std::max(s, std::abs(uab[j]));
  }
  CHECK(m <= 1e-12 * s);
  // manufactured solution with the seed's shape: N = eps^2 p*' + Qtilde p*
  const cplx bm(0.7, -0.4);
  std::vector<cplx> q(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx x = c.xi[j];
    q[j] = prm.eps * prm.eps * bm * (1.0 - x * x) / ((x * x + 1.0) * (x * x + 1.0)) +
           eval_Qtilde(x, prm.gamma) * bm * x / (x * x + 1.0);
  }
  const auto pq = apply_U(q, c, prm);
  double dev = 0.0;
  for (std::size_t j = 0; j < n; ++j) dev = std::max(dev, std::abs(pq[j] - bm * c.xi[j] / (c.xi[j] * c.xi[j] + 1.0)));
  CHECK(dev < 1e-6);
}

TEST_CASE("U operator against a direct ODE solve") {
  const auto& c = contour035();
  const Params& prm = prm035();
  const double e2 = prm.eps * prm.eps, g = prm.gamma;
  auto h = [](cplx x) { return std::exp(-(x + 2.0) * (x + 2.0)) * (1.0 + 0.5 * I1); };
  std::vector<cplx> N(c.xi.size());
  for (std::size_t j = 0; j < N.size(); ++j) N[j] = eval_Qtilde(c.xi[j], g) * h(c.xi[j]);
  const auto p = apply_U(N, c, prm);
  for (std::size_t j : {std::size_t{1200}, std::size_t{1600}, std::size_t{1999}}) {
    const auto path = ComplexPath::segment(-50.0, c.xi[j]);
    const auto tr = integrate_ode(
        path, [&](cplx t, cplx y) { return eval_Qtilde(t, g) * (h(t) - y) / e2; }, 0.0, 1e-12);
    CHECK(std::abs(p[j] - tr.back().value) < 1e-6);
  }
}

TEST_CASE("nonlocal correction: fixed rule against adaptive quadrature") {
  OuterConfig cfg;
  cfg.r2_outer = 1e3;
  const Params& prm = prm035();
  const double e2 = prm.eps * prm.eps;
  const ItildeRule rule = build_itilde(prm, cfg);
  ComplexPath r2 = ComplexPath::ray_in(0.0, std::numbers::pi - rule.theta, 1e3, 2.0);
  r2.ray_out(rule.theta, 1e3, 2.0);
  for (cplx xi : {cplx(-0.5), cplx(-0.05)}) {
    const cplx adaptive =
        -integrate_quadrature(r2, [&](cplx t) { return itilde_integrand(t, prm, 1e-12) / (t - xi); }, 1e-10) /
        (2 * std::numbers::pi);
    CHECK(std::abs(rule(xi) - adaptive) < 1e-8 * e2);
  }
  // truncation sensitivity of the default rule is far below the correction scale
  const ItildeRule full = build_itilde(prm, {});
  CHECK(std::abs(full(-0.5) - rule(-0.5)) < 2e-3 * e2);
  CHECK(std::abs(full(-0.5)) < 10 * e2);
}

TEST_CASE("Picard run at eps = 0.35") {
  const Params& prm = prm035();
  const OuterSolution s = picard_solve(prm);
  REQUIRE(s.converged);
  for (std::size_t j = 0; j < s.seed.size(); ++j) {
    const cplx x = s.contour.xi[j];
    CHECK(std::abs(s.seed[j] - s.beta0 * x / (x * x + 1.0)) == 0.0);
  }
  CHECK(s.residual_sup < 1e-4);
  CHECK(s.max_G6 < 10 * prm.eps * prm.eps);
  CHECK(s.max_G7 < 10 * prm.eps * prm.eps);
  // beta stabilizes with the iterates
  for (std::size_t k = 3; k < s.iterations.size(); ++k)
    CHECK(std::abs(s.iterations[k].beta - s.iterations[k - 1].beta) <=
          std::abs(s.iterations[k - 1].beta - s.iterations[k - 2].beta));
  // tip nodes: residual stays under the global bound although Qtilde ~ -gamma^2/xi
  const auto r = outer_residual(s, prm, {});
  for (std::size_t j = r.size() - 20; j < r.size(); ++j) CHECK(r[j] <= s.residual_sup * (1 + 1e-12));
  // boundary condition
  CHECK(bc_residual(s, prm, default_bc_grid()) < 5e-3 * prm.eps * prm.eps);
  CHECK(code_of([&] { bc_residual(s, prm, {0.01}); }) == Errc::continuation_fail);
}

TEST_CASE("Picard guards") {
  CHECK(code_of([] { picard_solve(params_from_gamma_eps(1.0, 0.35), {}, OuterMode::FULL_STUB); }) ==
        Errc::not_implemented);
  CHECK(code_of([] { picard_solve(params_from_gamma_eps(1.0, 0.6)); }) == Errc::regime);
  OuterConfig cfg;
  cfg.reflect_current = true;
  CHECK(code_of([&] { picard_solve(params_from_gamma_eps(1.0, 0.35), cfg); }) == Errc::divergence);
}

TEST_CASE("boundary-condition residual of the unperturbed finger") {
  const Field zero = [](cplx) { return cplx(0.0); };
  CHECK(bc_residual_fields(zero, zero, 0.0, 1.0, default_bc_grid()) == 0.0);
}

TEST_CASE("boundary-condition residual shrinks with eps") {
  const Params p4 = params_from_gamma_eps(1.0, 0.4), p3 = params_from_gamma_eps(1.0, 0.3);
  const double r4 = bc_residual(picard_solve(p4), p4, default_bc_grid());
  const double r3 = bc_residual(picard_solve(p3), p3, default_bc_grid());
  CHECK(r3 < r4);
}
