#include <doctest.h>

#include <cmath>

#include "fingersel/errors.hpp"
#include "fingersel/inner.hpp"

using namespace fsel;

TEST_CASE("nonlinear series closed form matches partial sums") {
  for (cplx psi : {cplx(0.1, 0.05), cplx(-0.3, 0.2), cplx(0.0, 0.4)}) {
    const cplx cf = nonlinear_series(psi);
    CHECK(std::abs(nonlinear_series_partial(psi, 200) - cf) < 1e-13);
    CHECK(std::abs(cf - 0.5 * (1.0 / ((1.0 + psi) * (1.0 + psi)) - 1.0 + 2.0 * psi)) < 1e-15);
  }
  CHECK(std::abs(nonlinear_series(0.0)) == 0.0);
}

TEST_CASE("far-field initialization residual improves with order") {
  const cplx eta = std::polar(40.0, 3 * std::numbers::pi / 4);
  for (double a : {0.0, 1.0, 5.0}) {
    auto res = [&](int order) {
      const double h = 1e-4;
      const cplx d = (psi_far_init(eta + h, a, order) - psi_far_init(eta - h, a, order)) / (2 * h);
      return inner_residual(eta, psi_far_init(eta, a, order), d, a);
    };
    CHECK(res(2) < res(1));
  }
  CHECK_THROWS_AS(psi_far_init(5.0, 0.0, 2), Error);
}

TEST_CASE("inner solve preconditions") {
  CHECK_THROWS_AS(solve_inner(1.0, 10.0, 1e-10), Error);
  CHECK_THROWS_AS(solve_inner(1.0, 40.0, 1e-6), Error);
}

TEST_CASE("inner solve: residual, stations and the RK4 oracle") {
  for (double a : {0.0, 1.0, 5.0}) {
    const InnerRun r = solve_inner(a, 40.0, 1e-10);
    CHECK(r.trace.max_residual() <= 1e-9);
    const auto rk = integrate_ode_rk4(r.path, [a](cplx t, cplx y) { return inner_rhs(t, y, a); },
                                      psi_far_init(r.path.start(), a, 2), 2e-3);
    CHECK(std::abs(r.trace.back().value - rk) < 1e-8 * std::max(1.0, std::abs(rk)));
    for (double st : inner_stations(5.0, 16.0)) CHECK_NOTHROW(r.psi_at(st));
  }
}

TEST_CASE("y-form and eta-form agree at eta = 8") {
  for (double a : {0.0, 1.0, 5.0}) {
    InnerOptions oy;
    oy.form = InnerForm::y_form;
    const cplx pe = solve_inner(a, 40.0, 1e-11).psi_at(8.0);
    const cplx py = solve_inner(a, 40.0, 1e-11, oy).psi_at(8.0);
    CHECK(std::abs(pe - py) < 1e-6);
  }
}

TEST_CASE("frozen values from an independent DOP853 integration") {
  // scipy solve_ivp(DOP853, rtol=atol=1e-13) on the same path and far-field data
  struct Row {
    double alpha, S9, re8, im8;
  };
  for (const Row& row : {Row{0.0, -0.011856276437302795, -0.042407853818582045, -4.711098377462855e-06},
                         Row{1.0, 0.5418292426652076, 0.03500264842991256, 0.00017154942117055997},
                         Row{5.0, -2152.774539828498, 0.6447045865589942, -0.34286131327327835}}) {
    const InnerRun r = solve_inner(row.alpha, 40.0, 1e-12);
    CHECK(r.psi_at(9.0).imag() * std::exp(9.0) == doctest::Approx(row.S9).epsilon(1e-6));
    CHECK(std::abs(r.psi_at(8.0) - cplx(row.re8, row.im8)) < 1e-9);
  }
}

TEST_CASE("full inner equation reduces to the leading one as eps -> 0") {
  E3Hook hook = [](double e23, cplx a, cplx b) { return e23 * a + b * b; };
  const cplx eta(7.0, 0.5), psi(0.1, -0.02);
  CHECK(std::abs(full_inner_rhs(eta, psi, 0.0, 1.0, hook) - inner_rhs(eta, psi, 1.0)) < 1e-15);
  CHECK(std::abs(full_inner_rhs(eta, psi, 1e-3, 1.0, hook) - inner_rhs(eta, psi, 1.0)) > 0.0);
}
