#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fingersel/errors.hpp"
#include "fingersel/helegeom.hpp"
#include "fingersel/spectrum.hpp"

using namespace fsel;

TEST_CASE("Stokes estimate and decay fit at alpha = 0") {
  const auto row = stokes_estimate(0.0, 1e-10);
  CHECK(row.S_est == doctest::Approx(-0.011856276437302795).epsilon(1e-6));
  CHECK(std::abs(row.slope + 1.0) < 0.03);
  CHECK(row.fit_residual < 1e-2);
  StokesOptions bad;
  bad.window_lo = 4.0;
  CHECK_THROWS_AS(stokes_estimate(0.0, 1e-10, bad), Error);
}

TEST_CASE("scan is independent of the worker count") {
  const auto a = scan(0.0, 2.0, 0.25, 1e-10, {}, 1);
  const auto b = scan(0.0, 2.0, 0.25, 1e-10, {}, 3);
  REQUIRE(a.size() == 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].S_est == b[i].S_est);
    CHECK(a[i].sign_change_next == b[i].sign_change_next);
  }
}

TEST_CASE("roots against an independent Brent solve") {
  // scipy brentq on Im psi(9) from a DOP853 integration, xtol 1e-12
  const auto rows = scan(0.0, 2.0, 0.25, 1e-11, {}, 1);
  const auto roots = find_roots(rows, 1e-7, 1e-11);
  REQUIRE(roots.size() == 2);
  CHECK(std::abs(roots[0].alpha_n - 0.25785731321250527) < 1e-6);
  CHECK(std::abs(roots[1].alpha_n - 1.552453521428576) < 1e-6);
  for (const auto& r : roots) CHECK(r.refinement_error <= 1e-7);
}

TEST_CASE("selection algebra") {
  std::vector<SpectrumEntry> roots(2);
  roots[0].alpha_n = 0.2578573;
  roots[1].alpha_n = 1.5524535;
  for (const auto& e : table_for_eps(roots, 0.1)) {
    const double lhs = (2 * e.lambda_n - 1) / ((1 - e.lambda_n) * std::pow(e.eps, 4.0 / 3.0));
    CHECK(std::abs(lhs - e.alpha_n) < 1e-12);
  }
  CHECK_THROWS_AS(table_for_eps(roots, 0.6), Error);
  double prev = 1.0;
  for (double c = 0.01; c > 1e-6; c /= 16) {
    const auto t = selection_table(c, roots, 2);
    REQUIRE(t.size() == 2);
    const double d = t[1].lambda_n - 0.5;
    CHECK(d > 0.0);
    CHECK(d < prev);
    prev = d;
    for (const auto& e : t) {
      CHECK(e.eps * e.eps == doctest::Approx(c * std::numbers::pi / (2 * e.lambda_n * (1 - e.lambda_n))).epsilon(1e-12));
      CHECK(std::abs((2 * e.lambda_n - 1) / ((1 - e.lambda_n) * std::pow(e.eps, 4.0 / 3.0)) - e.alpha_n) < 1e-12);
    }
  }
  CHECK_THROWS_AS(selection_table(1.0, roots, 2), Error);
}
