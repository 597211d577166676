#include "fingersel/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include "fingersel/errors.hpp"
#include "fingersel/helegeom.hpp"

namespace fsel {

StokesScanRow stokes_estimate(double alpha, double tol, const StokesOptions& opt) {
  if (!(opt.window_lo >= 6.0 && opt.window_hi <= 12.0 && opt.window_lo < opt.window_hi))
    throw Error(Errc::domain, "eta window must lie inside [6, 12]");
  const InnerRun run = solve_inner(alpha, opt.rho_start, tol, opt.inner);
  StokesScanRow row;
  row.alpha = alpha;
  row.eta_lo = opt.window_lo;
  row.eta_hi = opt.window_hi;

  const double im_m = run.psi_at(opt.eta_m).imag();
  if (opt.check_noise && std::abs(im_m) < 1e2 * tol)
    throw Error(Errc::window_noise, "Im psi at eta_m is below the integrator noise floor");
  row.S_est = im_m * std::exp(opt.eta_m);

  // log|Im psi| = log|S| + slope*eta + p*log(eta)
  std::vector<std::pair<double, double>> pts;
  for (auto [eta, psi] : run.real_axis())
    if (eta >= opt.window_lo - 1e-12 && eta <= opt.window_hi + 1e-12 && psi.imag() != 0.0)
      pts.emplace_back(eta, std::log(std::abs(psi.imag())));
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n < 4) throw Error(Errc::window_noise, "too few window samples");
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eta = pts[static_cast<std::size_t>(i)].first;
    A(i, 0) = 1.0;
    A(i, 1) = eta;
    A(i, 2) = std::log(eta);
    b(i) = pts[static_cast<std::size_t>(i)].second;
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  row.log_S = x(0);
  row.slope = x(1);
  row.p = x(2);
  row.fit_residual = std::sqrt((A * x - b).squaredNorm() / static_cast<double>(n));
  return row;
}

int default_workers() {
  if (const char* e = std::getenv("FINGER_SELECT_THREADS")) {
    try {
      const int v = std::stoi(e);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

std::vector<StokesScanRow> scan(double alpha_min, double alpha_max, double step, double tol,
                                const StokesOptions& opt, int workers) {
  if (!(step > 0.0) || alpha_min > alpha_max) throw Error(Errc::domain, "need step > 0 and alpha_min <= alpha_max");
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double a = alpha_min + step * static_cast<double>(k);
    if (a > alpha_max + 1e-9 * step) break;
    grid.push_back(a);
  }
  std::vector<StokesScanRow> rows(grid.size());
  std::vector<std::exception_ptr> errs(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        // tighten tolerance once if the window is too quiet, then accept the row as noisy
        try {
          rows[i] = stokes_estimate(grid[i], tol, opt);
        } catch (const Error& e) {
          if (e.code() != Errc::window_noise) throw;
          StokesOptions o = opt;
          o.check_noise = false;
          rows[i] = stokes_estimate(grid[i], tol / 10.0, o);
          rows[i].noisy = std::abs(rows[i].S_est) * std::exp(-opt.eta_m) < 1e2 * tol / 10.0;
        }
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  if (workers <= 0) workers = default_workers();
  workers = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    rows[i].sign_change_next = (rows[i].S_est > 0) != (rows[i + 1].S_est > 0) && rows[i].S_est != 0.0;
  return rows;
}

double stokes_sign_value(double alpha, double tol, const StokesOptions& opt) {
  const InnerRun run = solve_inner(alpha, opt.rho_start, tol, opt.inner);
  return run.psi_at(opt.eta_m).imag() * std::exp(opt.eta_m);
}

std::vector<SpectrumEntry> find_roots(const std::vector<StokesScanRow>& rows, double refine_tol,
                                      double tol, const StokesOptions& opt) {
  if (!(refine_tol > 0.0)) throw Error(Errc::domain, "refine_tol must be positive");
  std::vector<SpectrumEntry> out;
  auto f = [&](double a) { return stokes_sign_value(a, tol, opt); };
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!rows[i].sign_change_next) continue;
    double a = rows[i].alpha, b = rows[i + 1].alpha;
    double fa = f(a), fb = f(b);
    if ((fa > 0) == (fb > 0)) continue;  // flagged by a noisy row; not a transversal root
    for (int it = 0; it < 200 && b - a > refine_tol; ++it) {
      if (b - a > 1e-3) {
        const double m = 0.5 * (a + b), fm = f(m);
        ((fm > 0) == (fa > 0) ? a : b) = m;
        ((fm > 0) == (fa > 0) ? fa : fb) = fm;
        continue;
      }
      // secant polish, then close the bracket around the estimate
      const double d = 0.4 * refine_tol;
      double x = a - fa * (b - a) / (fb - fa);
      x = std::clamp(x, a + d, b - d);
      const double xl = x - d, xr = x + d;
      const double fl = f(xl), fr = f(xr);
      if ((fl > 0) != (fr > 0)) {
        a = xl, fa = fl, b = xr, fb = fr;
      } else if ((fl > 0) == (fa > 0)) {
        a = xr, fa = fr;
      } else {
        b = xl, fb = fl;
      }
    }
    if ((fa > 0) == (fb > 0)) throw Error(Errc::degenerate, "sign did not flip after refinement");
    SpectrumEntry e;
    e.n = static_cast<int>(out.size()) + 1;
    e.lo = a;
    e.hi = b;
    e.alpha_n = 0.5 * (a + b);
    e.refinement_error = 0.5 * (b - a);
    out.push_back(e);
  }
  return out;
}

std::vector<SpectrumEntry> table_for_eps(std::vector<SpectrumEntry> roots, double eps) {
  if (eps > 0.5) throw Error(Errc::regime, "eps > 0.5 is outside the asymptotic regime");
  for (auto& e : roots) {
    e.eps = eps;
    e.lambda_n = lambda_from_alpha(e.alpha_n, eps);
    e.c = eps * eps * 2.0 * e.lambda_n * (1.0 - e.lambda_n) / std::numbers::pi;
  }
  return roots;
}

std::vector<SpectrumEntry> selection_table(double c, const std::vector<SpectrumEntry>& roots, int count) {
  if (!(c > 0.0)) throw Error(Errc::domain, "c must be positive");
  std::vector<SpectrumEntry> out;
  for (const auto& r : roots) {
    if (static_cast<int>(out.size()) >= count) break;
    double lam = 0.5, eps = 0.0, prev_eps = -1.0, prev_lam = -1.0;
    int it = 0;
    for (; it < 500; ++it) {
      eps = std::sqrt(c * std::numbers::pi / (2.0 * lam * (1.0 - lam)));
      if (eps > 0.5) throw Error(Errc::regime, "eps = " + std::to_string(eps) + " exceeds 0.5");
      lam = lambda_from_alpha(r.alpha_n, eps);
      if (std::abs(eps - prev_eps) < 1e-14 && std::abs(lam - prev_lam) < 1e-14) break;
      prev_eps = eps;
      prev_lam = lam;
    }
    if (it == 500)
      throw Error(Errc::no_convergence, "lambda/eps iteration stalled at lambda=" + std::to_string(lam) +
                                            " eps=" + std::to_string(eps));
    SpectrumEntry e = r;
    e.eps = eps;
    e.lambda_n = lam;
    e.c = c;
    out.push_back(e);
  }
  return out;
}

}  // namespace fsel
