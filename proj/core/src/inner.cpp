#include "fingersel/inner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fingersel/errors.hpp"

namespace fsel {

namespace {

constexpr double kPi = std::numbers::pi;
const double c23 = std::pow(6.0, 2.0 / 3.0);

cplx N1(cplx eta, cplx psi, double alpha) {
  return -1.0 / (3.0 * eta) - psi / (3.0 * eta) + alpha / (c23 * std::pow(eta, 2.0 / 3.0)) +
         nonlinear_series(psi);
}

cplx y_of_eta(cplx eta) { return std::pow(1.5 * eta, 1.0 / 3.0); }

}  // namespace

cplx nonlinear_series(cplx psi) {
  if (std::abs(1.0 + psi) == 0.0) throw Error(Errc::pole, "psi = -1");
  const cplx q = 1.0 / (1.0 + psi);
  return 0.5 * (q * q - 1.0 + 2.0 * psi);
}

cplx nonlinear_series_partial(cplx psi, int nmax) {
  cplx s = 0.0, pw = psi * psi;
  for (int n = 2; n <= nmax; ++n) {
    s += (n % 2 == 0 ? 1.0 : -1.0) * (n + 1.0) * pw;
    pw *= psi;
  }
  return 0.5 * s;
}

cplx inner_rhs(cplx eta, cplx psi, double alpha) {
  if (eta == cplx(0.0)) throw Error(Errc::domain, "eta = 0");
  return -psi + N1(eta, psi, alpha);
}

cplx full_inner_rhs(cplx eta, cplx psi, double eps, double alpha, const E3Hook& hook) {
  if (eta == cplx(0.0)) throw Error(Errc::domain, "eta = 0");
  cplx f = inner_rhs(eta, psi, alpha);
  if (eps != 0.0 && hook) {
    const double e23 = std::pow(eps, 2.0 / 3.0);
    const cplx e23eta = e23 * std::pow(eta, 2.0 / 3.0);
    f += e23 * hook(e23, e23eta, std::pow(eta, -2.0 / 3.0));
  }
  return f;
}

cplx psi_far_init(cplx eta, double alpha, int order) {
  if (std::abs(eta) < 20.0) throw Error(Errc::domain, "|eta| must be at least 20");
  if (order != 1 && order != 2) throw Error(Errc::domain, "order must be 1 or 2");
  const cplx e23 = std::pow(eta, 2.0 / 3.0);
  const cplx p1 = alpha / (c23 * e23) - 1.0 / (3.0 * eta);
  if (order == 1) return p1;
  // one formal iteration psi <- N1(psi1) - psi1'
  const cplx dp1 = -(2.0 / 3.0) * alpha / (c23 * e23 * eta) + 1.0 / (3.0 * eta * eta);
  return N1(eta, p1, alpha) - dp1;
}

double inner_residual(cplx eta, cplx psi, cplx dpsi, double alpha) {
  return std::abs(dpsi - inner_rhs(eta, psi, alpha));
}

std::vector<double> inner_stations(double rho0, double eta_end) {
  std::vector<double> st;
  for (int k = 0; k <= 60; ++k) st.push_back(6.0 + 0.1 * k);
  for (double e = std::ceil(rho0); e <= eta_end; e += 1.0) st.push_back(e);
  st.erase(std::remove_if(st.begin(), st.end(), [&](double e) { return e <= rho0 || e >= eta_end; }), st.end());
  std::sort(st.begin(), st.end());
  st.erase(std::unique(st.begin(), st.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), st.end());
  return st;
}

InnerRun solve_inner(double alpha, double rho_start, double tol, const InnerOptions& opt) {
  if (rho_start < 20.0) throw Error(Errc::domain, "rho_start must be at least 20");
  if (!(tol > 0.0) || tol > 1e-9) throw Error(Errc::domain, "tol must lie in (0, 1e-9]");
  if (!(opt.rho0 > 0.0) || opt.rho0 >= rho_start) throw Error(Errc::domain, "need 0 < rho0 < rho_start");
  const double th = 3.0 * kPi / 4.0;

  InnerRun run;
  run.alpha = alpha;
  run.form = opt.form;
  run.rho_start = rho_start;
  run.rho0 = opt.rho0;
  run.eta_end = opt.eta_end;
  run.tol = tol;

  const cplx eta_s = std::polar(rho_start, th);
  const cplx psi_s = psi_far_init(eta_s, alpha, opt.far_order);
  const auto stations = inner_stations(opt.rho0, opt.eta_end);

  auto rhs_eta = [&](cplx eta, cplx psi) { return full_inner_rhs(eta, psi, opt.eps, alpha, opt.hook); };

  if (opt.form == InnerForm::eta_form) {
    // ray inward along arg 3pi/4, arc down to the real axis, then outward
    ComplexPath p = ComplexPath::segment(eta_s, std::polar(opt.rho0, th));
    p.arc_to(0.0, 0.0);
    for (double e : stations) p.line_to(e);
    p.line_to(opt.eta_end);
    run.path = p;
    run.trace = integrate_ode(p, rhs_eta, psi_s, tol);
  } else {
    // same path pulled back by eta = (2/3) y^3, psi = 1 - y G
    const double a = th / 3.0;
    const cplx ys = y_of_eta(eta_s);
    const double r0 = std::cbrt(1.5 * opt.rho0);
    ComplexPath p = ComplexPath::segment(ys, std::polar(r0, a));
    p.arc_to(0.0, 0.0);
    for (double e : stations) p.line_to(std::cbrt(1.5 * e));
    p.line_to(std::cbrt(1.5 * opt.eta_end));
    run.path = p;
    auto rhs_y = [&](cplx y, cplx G) {
      const cplx eta = (2.0 / 3.0) * y * y * y;
      const cplx psi = 1.0 - y * G;
      return (-2.0 * y * y * rhs_eta(eta, psi) - G) / y;
    };
    run.trace = integrate_ode(p, rhs_y, (1.0 - psi_s) / ys, tol);
  }
  return run;
}

std::pair<cplx, cplx> InnerRun::eta_psi(const TraceSample& s) const {
  if (form == InnerForm::eta_form) return {s.t, s.value};
  const cplx y = s.t;
  return {(2.0 / 3.0) * y * y * y, 1.0 - y * s.value};
}

cplx InnerRun::psi_at(double eta) const {
  for (const auto& s : trace.samples) {
    auto [e, psi] = eta_psi(s);
    if (std::abs(e.imag()) < 1e-9 && std::abs(e.real() - eta) < 1e-9 * std::max(1.0, eta)) return psi;
  }
  throw Error(Errc::domain, "eta is not a real-axis station of this run");
}

std::vector<std::pair<double, cplx>> InnerRun::real_axis() const {
  std::vector<std::pair<double, cplx>> out;
  for (const auto& s : trace.samples) {
    auto [e, psi] = eta_psi(s);
    if (std::abs(e.imag()) < 1e-9 && e.real() >= rho0 * (1 - 1e-12)) out.emplace_back(e.real(), psi);
  }
  return out;
}

}  // namespace fsel
