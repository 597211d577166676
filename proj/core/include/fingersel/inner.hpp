#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fingersel/cpath.hpp"

namespace fsel {

enum class InnerForm { y_form, eta_form };

// Perturbation hook for the full inner equation: E3(eps^{2/3}, eps^{2/3} eta^{2/3}, eta^{-2/3}).
using E3Hook = std::function<cplx(double eps23, cplx a, cplx b)>;

struct InnerOptions {
  double rho0 = 5.0;      // corner radius
  double eta_end = 16.0;  // end of the real-axis leg
  int far_order = 2;
  InnerForm form = InnerForm::eta_form;
  double eps = 0.0;  // full-inner perturbation strength (0 = leading-order equation)
  E3Hook hook;
};

struct InnerRun {
  double alpha = 0.0;
  InnerForm form = InnerForm::eta_form;
  double rho_start = 0.0;
  double rho0 = 0.0;
  double eta_end = 0.0;
  ComplexPath path;  // in eta for eta_form, in y for y_form
  Trace trace;
  double tol = 0.0;

  // Samples re-expressed as (eta, psi) regardless of the form solved.
  std::pair<cplx, cplx> eta_psi(const TraceSample& s) const;
  // psi at a real-axis station eta (stations: every 0.1 on [6, 12] plus integer points)
  cplx psi_at(double eta) const;
  // (eta, psi) on the real-axis leg, in path order
  std::vector<std::pair<double, cplx>> real_axis() const;
};

// 1/2 sum_{n>=2} (-1)^n (n+1) psi^n in closed form, and its partial sums.
cplx nonlinear_series(cplx psi);
cplx nonlinear_series_partial(cplx psi, int nmax);

// Right-hand side N1(eta, psi) - psi of d psi/d eta.
cplx inner_rhs(cplx eta, cplx psi, double alpha);
cplx full_inner_rhs(cplx eta, cplx psi, double eps, double alpha, const E3Hook& hook = {});

cplx psi_far_init(cplx eta, double alpha, int order);

// Residual |d psi/d eta - rhs| given an explicit derivative (for checking initializations).
double inner_residual(cplx eta, cplx psi, cplx dpsi, double alpha);

InnerRun solve_inner(double alpha, double rho_start, double tol, const InnerOptions& opt = {});

// real-axis stations used by every run
std::vector<double> inner_stations(double rho0, double eta_end);

}  // namespace fsel
