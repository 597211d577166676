#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fingersel/errors.hpp"
#include "fingersel/helegeom.hpp"

using namespace fsel;
using std::numbers::pi;
constexpr cplx I1{0.0, 1.0};

namespace {
// closed-form Cauchy integral I(xi) = int dt/((t-xi) sqrt(t^2+g^2)), Im xi != 0
cplx I_closed(cplx xi, double g) {
  const cplx s = sroot(xi, g);
  const cplx wp = (xi + s) / g, wm = (xi - s) / g;
  return (std::log(-wm) - std::log(-wp)) / s;
}
cplx Ip_closed(cplx xi, double g) {
  const cplx s = sroot(xi, g);
  const cplx wp = (xi + s) / g, wm = (xi - s) / g;
  const cplx L = std::log(-wm) - std::log(-wp);
  return -xi * L / (s * s * s) - 2.0 / (s * s);
}
Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::not_implemented;
}
}  // namespace

TEST_CASE("parameter relations round-trip") {
  const Params p = params_from(0.6, 0.01);
  CHECK(p.gamma == doctest::Approx(1.5));
  CHECK(p.eps * p.eps == doctest::Approx(0.01 * pi / (2 * 0.6 * 0.4)));
  CHECK(lambda_from_alpha(p.alpha, p.eps) == doctest::Approx(0.6).epsilon(1e-14));
  const Params q = params_from_gamma_eps(1.0, 0.35);
  CHECK(q.lambda == doctest::Approx(0.5));
  CHECK(q.eps == doctest::Approx(0.35));
}

TEST_CASE("branches of the square roots") {
  const double g = 1.3;
  CHECK(std::abs(sroot(2.0, g) - std::sqrt(4.0 + g * g)) < 1e-15);
  CHECK(std::abs(sroot(-2.0, g) - std::sqrt(4.0 + g * g)) < 1e-15);
  // continuous across the real axis, cuts on the imaginary axis beyond +-i gamma
  for (double x : {-3.0, -0.5, 0.0, 0.7})
    CHECK(std::abs(sroot(cplx(x, 1e-9), g) - sroot(cplx(x, -1e-9), g)) < 1e-8);
  CHECK(code_of([&] { eval_Qtilde(cplx(0.0, 2.0), g); }) == Errc::cut);
  CHECK(code_of([&] { eval_H(I1, g); }) == Errc::pole);
}

TEST_CASE("V0 identities and conjugate symmetry at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ug(0.5, 2.5);
  for (int k = 0; k < 100; ++k) {
    const double g = ug(rng);
    const cplx xi(u(rng), -std::abs(u(rng)) - 0.05);
    const cplx s = sroot(xi, g), V0 = eval_V0(xi, g), r = eval_sqrtV0sq_minus4(xi, g);
    CHECK(std::abs(r * r - (V0 * V0 - 4.0)) < 1e-12 * std::max(1.0, std::norm(V0)));
    CHECK(std::abs(r + 2.0 * I1 * xi / s) < 1e-13 * std::abs(r) + 1e-15);
    CHECK(std::abs(eval_Hbar(xi, g) - std::conj(eval_H(std::conj(xi), g))) == 0.0);
  }
}

TEST_CASE("tip behaviour of Qtilde") {
  for (double g : {0.8, 1.0, 1.5})
    for (cplx d : {cplx(-1.0, 0.0), cplx(0.0, -1.0), cplx(-0.6, -0.8)}) {
      const cplx xi = 1e-4 * d;
      CHECK(std::abs(xi * eval_Qtilde(xi, g) + g * g) < 1e-6 * g * g + 2e-4 * g * g);
    }
  CHECK(std::abs(-1e-8 * eval_Qtilde(-1e-8, 1.0) + 1.0) < 1e-6);
}

TEST_CASE("g1 g2 = 1 and the kernel is bounded on a descent segment") {
  const double eps = 0.3, g = 1.0;
  for (cplx xi : {cplx(-0.5, 0.0), cplx(-2.0, -0.3), cplx(-0.2, -0.1)}) {
    const cplx a = eval_g(xi, eps, GKind::g1, g), b = eval_g(xi, eps, GKind::g2, g);
    CHECK(std::abs(a * b - 1.0) < 1e-12);
  }
  CHECK(std::abs(weight_ratio(-0.3, -3.0, eps, g)) <= 1.0);
  CHECK(code_of([&] { weight_ratio(-3.0, -0.3, eps, g); }) == Errc::not_descent);
}

TEST_CASE("P has its base at -1 and derivative Qtilde") {
  const double g = 1.2;
  CHECK(std::abs(eval_P(-1.0, g)) < 1e-15);
  for (cplx xi : {cplx(-2.0, -0.5), cplx(-0.3, 0.0), cplx(1.5, -0.2)}) {
    const double h = 1e-5;
    const cplx d = (eval_P(xi + h, g) - eval_P(xi - h, g)) / (2 * h);
    CHECK(std::abs(d - eval_Qtilde(xi, g)) < 1e-8 * std::abs(eval_Qtilde(xi, g)));
  }
}

TEST_CASE("Cauchy integral against its closed form") {
  for (double g : {0.7, 1.0, 2.0})
    for (cplx xi : {cplx(0.3, 0.5), cplx(-2.0, -0.01), cplx(5.0, -3.0), cplx(-40.0, 7.0), cplx(0.0, -0.4)}) {
      CHECK(std::abs(cauchy_I(xi, g) - I_closed(xi, g)) < 1e-11 * std::max(1.0, std::abs(I_closed(xi, g))));
      CHECK(std::abs(cauchy_Iprime(xi, g) - Ip_closed(xi, g)) < 1e-10 * std::max(1.0, std::abs(Ip_closed(xi, g))));
    }
}

TEST_CASE("boundary values from below match the Plemelj closed form") {
  for (double g : {0.8, 1.0, 1.5})
    for (double x : {-20.0, -2.0, -0.3, 0.0, 0.4, 3.0}) {
      const double s = std::sqrt(x * x + g * g);
      const cplx I = (std::log((s - x) / (s + x)) - I1 * pi) / s;
      CHECK(std::abs(cauchy_I_below(x, g) - I) < 1e-11);
      CHECK(std::abs(cauchy_I_below(x, g) - I_closed(cplx(x, -1e-9), g)) < 1e-7);
      CHECK(std::abs(cauchy_Iprime_below(x, g) - Ip_closed(cplx(x, -1e-9), g)) < 1e-7);
    }
  CHECK(code_of([] { eval_Q(cplx(0.0, 0.5), 1.0); }) == Errc::domain);
}

TEST_CASE("Saffman-Taylor map") {
  CHECK(std::abs(map_z0(0.0, 0.5)) < 1e-12);
  CHECK(std::abs(map_z0(0.0, 0.6)) < 1e-12);
  for (double lam : {0.5, 0.6}) {
    CHECK(std::abs(map_z0(-1e4, lam).imag() - lam) < 1e-3);
    CHECK(std::abs(map_z0(1e4, lam).imag() + lam) < 1e-3);
  }
  const auto poly = shape_sample(0.6, nullptr, 10000);
  CHECK(univalence_check(poly).ok());
  // a folded boundary is detected
  auto bad = poly;
  std::swap(bad[100].z, bad[200].z);
  CHECK_FALSE(univalence_check(bad).ok());
  CHECK(code_of([] { shape_sample(1.2, nullptr, 10); }) == Errc::domain);
}
