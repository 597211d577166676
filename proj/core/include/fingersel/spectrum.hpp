#pragma once

#include <vector>

#include "fingersel/inner.hpp"

namespace fsel {

struct StokesOptions {
  double eta_m = 9.0;
  double window_lo = 6.0;
  double window_hi = 12.0;
  double rho_start = 40.0;
  InnerOptions inner;
  bool check_noise = true;
};

struct StokesScanRow {
  double alpha = 0.0;
  double S_est = 0.0;   // Im psi(eta_m) e^{eta_m}
  double p = 0.0;       // fitted algebraic prefactor power
  double slope = 0.0;   // fitted exponential rate (expected -1)
  double log_S = 0.0;   // fitted log|S|
  double fit_residual = 0.0;  // rms of the log fit
  double eta_lo = 6.0;
  double eta_hi = 12.0;
  bool sign_change_next = false;  // S_est flips sign before the next grid row
  bool noisy = false;
};

StokesScanRow stokes_estimate(double alpha, double tol, const StokesOptions& opt = {});

// Worker count: FINGER_SELECT_THREADS if set, else hardware concurrency.
int default_workers();

std::vector<StokesScanRow> scan(double alpha_min, double alpha_max, double step, double tol,
                                const StokesOptions& opt = {}, int workers = 0);

struct SpectrumEntry {
  int n = 0;
  double alpha_n = 0.0;
  double lo = 0.0, hi = 0.0;  // final bracket
  double refinement_error = 0.0;
  double lambda_n = 0.0;
  double eps = 0.0;
  double c = 0.0;
};

// Sign of S_est at alpha with no noise guard (used inside brackets near a root).
double stokes_sign_value(double alpha, double tol, const StokesOptions& opt);

std::vector<SpectrumEntry> find_roots(const std::vector<StokesScanRow>& rows, double refine_tol,
                                      double tol, const StokesOptions& opt = {});

// Fill lambda/eps/c for fixed eps.
std::vector<SpectrumEntry> table_for_eps(std::vector<SpectrumEntry> roots, double eps);
// Self-consistent (lambda, eps) for a given undercooling c; at most `count` rows.
std::vector<SpectrumEntry> selection_table(double c, const std::vector<SpectrumEntry>& roots, int count);

}  // namespace fsel
