// finger_select: selection spectrum, inner traces, shapes, outer Picard runs and contour checks.
#include <CLI11.hpp>
#include <json.hpp>

#include <fmt/format.h>
#include <fmt/os.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "fingersel/appendixcheck.hpp"
#include "fingersel/errors.hpp"
#include "fingersel/helegeom.hpp"
#include "fingersel/inner.hpp"
#include "fingersel/outerp.hpp"
#include "fingersel/spectrum.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fsel;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Collects output files and writes manifest.json last.
class Run {
 public:
  Run(std::string command, json params, fs::path out)
      : command_(std::move(command)), params_(std::move(params)), out_(std::move(out)),
        t0_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_);
  }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_ / name).string());
    return f;
  }

  void summary(const std::string& key, json v) { summary_[key] = std::move(v); }

  void finish() {
    json m;
    m["command"] = command_;
    m["parameters"] = params_;
    m["tool_version"] = kVersion;
    m["input_hash"] = fmt::format("{:016x}", fnv1a(command_ + params_.dump()));
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    m["outputs"] = files_;
    m["summary"] = summary_;
    std::ofstream f(out_ / "manifest.json");
    f << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  json params_;
  fs::path out_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::string> files_;
  json summary_ = json::object();
};

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
  double c = 0.0, eps = 0.0;
  double alpha_min = 0.0, alpha_max = 20.0, step = 0.25;
  double tol = 1e-10, refine_tol = 1e-6;
  double eta_m = 9.0, rho_start = 40.0;
  int threads = 0;
  std::string out = "out";
};

int cmd_spectrum(const SpectrumArgs& a, bool have_c, bool have_eps) {
  require(have_c != have_eps, "exactly one of --c and --eps is required");
  require(!have_c || a.c > 0.0, "--c must be positive");
  require(!have_eps || a.eps > 0.0, "--eps must be positive");
  require(a.alpha_max > 0.0 && a.step > 0.0 && a.tol > 0.0 && a.refine_tol > 0.0, "flags must be positive");
  require(a.alpha_min >= 0.0 && a.alpha_min < a.alpha_max, "need 0 <= --alpha-min < --alpha-max");
  require(a.tol <= 1e-9, "--tol must be <= 1e-9");
  require(a.rho_start >= 20.0, "--rho-start must be >= 20");
  if (have_eps && a.eps > 0.5) throw Error(Errc::regime, "eps > 0.5 is outside the asymptotic regime");

  json params{{"c", have_c ? json(a.c) : json(nullptr)},
              {"eps", have_eps ? json(a.eps) : json(nullptr)},
              {"alpha_min", a.alpha_min},
              {"alpha_max", a.alpha_max},
              {"step", a.step},
              {"tol", a.tol},
              {"refine_tol", a.refine_tol},
              {"eta_m", a.eta_m},
              {"rho_start", a.rho_start}};
  Run run("spectrum", params, a.out);
  StokesOptions opt;
  opt.eta_m = a.eta_m;
  opt.rho_start = a.rho_start;
  const int workers = a.threads > 0 ? a.threads : default_workers();
  const auto rows = scan(a.alpha_min, a.alpha_max, a.step, a.tol, opt, workers);
  auto roots = find_roots(rows, a.refine_tol, a.tol, opt);
  roots = have_eps ? table_for_eps(roots, a.eps) : selection_table(a.c, roots, static_cast<int>(roots.size()));

  {
    auto f = run.open("stokes_scan.csv");
    f << "alpha,S_est,slope,p,log_S,fit_residual,eta_lo,eta_hi,sign_change_next,noisy\n";
    for (const auto& r : rows)
      f << num(r.alpha) << ',' << num(r.S_est) << ',' << num(r.slope) << ',' << num(r.p) << ',' << num(r.log_S)
        << ',' << num(r.fit_residual) << ',' << num(r.eta_lo) << ',' << num(r.eta_hi) << ','
        << int(r.sign_change_next) << ',' << int(r.noisy) << '\n';
  }
  {
    auto f = run.open("spectrum.csv");
    f << "n,alpha_n,bracket_lo,bracket_hi,refinement_error,lambda_n,eps,c\n";
    for (const auto& e : roots)
      f << e.n << ',' << num(e.alpha_n) << ',' << num(e.lo) << ',' << num(e.hi) << ',' << num(e.refinement_error)
        << ',' << num(e.lambda_n) << ',' << num(e.eps) << ',' << num(e.c) << '\n';
  }
  {
    auto f = run.open("spectrum.plt");
    f << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'alpha'\n"
         "set ylabel 'S_est'\nset yrange [-5:5]\nset xzeroaxis\n"
         "plot 'stokes_scan.csv' using 1:2 with linespoints title 'S_est', \\\n"
         "     'spectrum.csv' using 2:(0) with points pt 7 title 'alpha_n'\n";
  }
  run.summary("rows", rows.size());
  run.summary("roots", roots.size());
  run.finish();
  fmt::print("{} scan rows, {} roots\n", rows.size(), roots.size());
  for (const auto& e : roots)
    fmt::print("  n={} alpha={:.10f} lambda={:.12f} eps={:.6f}\n", e.n, e.alpha_n, e.lambda_n, e.eps);
  return 0;
}

// ---------------------------------------------------------------- inner

struct InnerArgs {
  double alpha = 0.0, rho_start = 40.0, tol = 1e-10;
  std::string form = "eta";
  std::string out = "out";
};

int cmd_inner(const InnerArgs& a) {
  require(a.rho_start >= 20.0, "--rho-start must be >= 20");
  require(a.tol > 0.0 && a.tol <= 1e-9, "--tol must lie in (0, 1e-9]");
  require(a.form == "eta" || a.form == "y", "--form must be eta or y");
  InnerOptions opt;
  opt.form = a.form == "y" ? InnerForm::y_form : InnerForm::eta_form;
  json params{{"alpha", a.alpha}, {"rho_start", a.rho_start}, {"tol", a.tol}, {"form", a.form}};
  Run run("inner", params, a.out);
  const InnerRun r = solve_inner(a.alpha, a.rho_start, a.tol, opt);
  {
    auto f = run.open("inner_trace.csv");
    f << "s,eta_re,eta_im,psi_re,psi_im,residual\n";
    for (const auto& s : r.trace.samples) {
      const auto [eta, psi] = r.eta_psi(s);
      f << num(s.s) << ',' << num(eta.real()) << ',' << num(eta.imag()) << ',' << num(psi.real()) << ','
        << num(psi.imag()) << ',' << num(s.residual) << '\n';
    }
  }
  {
    auto f = run.open("inner.plt");
    f << "set datafile separator ','\nset key autotitle columnhead\nset logscale y\nset xlabel 'eta'\n"
         "plot 'inner_trace.csv' using 2:(($3==0 && $2>=6) ? abs($5) : 1/0) with linespoints title '|Im psi|'\n";
  }
  StokesOptions so;
  so.rho_start = a.rho_start;
  so.inner = opt;
  so.check_noise = false;
  const auto row = stokes_estimate(a.alpha, a.tol, so);
  const double mr = r.trace.max_residual();
  run.summary("max_residual", mr);
  run.summary("residual_ok", mr <= 10.0 * a.tol);
  run.summary("S_est", row.S_est);
  run.summary("log_slope_6_12", row.slope);
  run.finish();
  fmt::print("samples={} max_residual={:.3e} (10*tol={:.1e}) S_est={:.10e} slope={:.5f}\n", r.trace.samples.size(), mr,
             10.0 * a.tol, row.S_est, row.slope);
  return 0;
}

// ---------------------------------------------------------------- shape

struct ShapeArgs {
  double lambda = 0.5, c = 0.0;
  int n = 1000;
  std::string out = "out";
};

int cmd_shape(const ShapeArgs& a) {
  require(a.lambda > 0.0 && a.lambda < 1.0, "--lambda must lie in (0, 1)");
  require(a.c >= 0.0, "--c must be non-negative");
  require(a.n >= 2, "--n must be at least 2");
  json params{{"lambda", a.lambda}, {"c", a.c}, {"n", a.n}};
  Run run("shape", params, a.out);
  Field F;
  if (a.c > 0.0) {
    // leading outer correction F = eps^2 (V0 - Q) on the real axis
    const Params prm = params_from(a.lambda, a.c);
    if (prm.eps > 0.5) throw Error(Errc::regime, "eps > 0.5 is outside the asymptotic regime");
    F = [prm](cplx xi) {
      const double x = xi.real();
      return prm.eps * prm.eps *
             (eval_V0(x, prm.gamma) + std::complex<double>(0.0, prm.gamma / std::numbers::pi) *
                                          cauchy_I_below(x, prm.gamma));
    };
  }
  const auto pts = shape_sample(a.lambda, F, a.n);
  const auto uv = univalence_check(pts);
  {
    auto f = run.open("shape.csv");
    f << "xi,x,y\n";
    for (const auto& p : pts) f << num(p.xi) << ',' << num(p.z.real()) << ',' << num(p.z.imag()) << '\n';
  }
  {
    auto f = run.open("shape.plt");
    f << "set datafile separator ','\nset key autotitle columnhead\nset size ratio -1\n"
         "set xlabel 'x'\nset ylabel 'y'\nplot 'shape.csv' using 2:3 with lines title 'finger'\n";
  }
  run.summary("univalent", uv.ok());
  run.summary("tip_z", {map_z(0.0, a.lambda, F).real(), map_z(0.0, a.lambda, F).imag()});
  run.finish();
  fmt::print("n={} univalent={} tail Im z: {:.6f} / {:.6f}\n", pts.size(), uv.ok(), pts.front().z.imag(),
             pts.back().z.imag());
  return 0;
}

// ---------------------------------------------------------------- outer

struct OuterArgs {
  double lambda = 0.5, c = 0.02;
  int iters = 40;
  int nodes = 2000;
  bool reflect_current = false;
  std::string out = "out";
};

int cmd_outer(const OuterArgs& a) {
  require(a.lambda > 0.0 && a.lambda < 1.0, "--lambda must lie in (0, 1)");
  require(a.c > 0.0, "--c must be positive");
  require(a.iters >= 1 && a.nodes >= 10, "--iters and --nodes must be positive");
  const Params prm = params_from(a.lambda, a.c);
  if (prm.eps > 0.5) throw Error(Errc::regime, fmt::format("eps = {:.4f} exceeds 0.5", prm.eps));
  json params{{"lambda", a.lambda}, {"c", a.c}, {"iters", a.iters}, {"nodes", a.nodes},
              {"reflect_current", a.reflect_current}};
  Run run("outer", params, a.out);
  OuterConfig cfg;
  cfg.max_iter = a.iters;
  cfg.nodes = a.nodes;
  cfg.reflect_current = a.reflect_current;
  const OuterSolution s = picard_solve(prm, cfg);
  {
    auto f = run.open("outer_history.csv");
    f << "iteration,sup_diff,beta_re,beta_im\n";
    for (const auto& r : s.iterations)
      f << r.index << ',' << num(r.diff) << ',' << num(r.beta.real()) << ',' << num(r.beta.imag()) << '\n';
  }
  {
    auto f = run.open("outer_solution.csv");
    f << "node,xi_re,xi_im,p_re,p_im,dp_re,dp_im\n";
    for (std::size_t j = 0; j < s.p.size(); ++j)
      f << j << ',' << num(s.contour.xi[j].real()) << ',' << num(s.contour.xi[j].imag()) << ','
        << num(s.p[j].real()) << ',' << num(s.p[j].imag()) << ',' << num(s.dp[j].real()) << ','
        << num(s.dp[j].imag()) << '\n';
  }
  {
    auto f = run.open("outer.plt");
    f << "set datafile separator ','\nset key autotitle columnhead\nset logscale y\n"
         "set xlabel 'iteration'\nplot 'outer_history.csv' using 1:2 with linespoints title 'sup |p_n - p_{n-1}|'\n";
  }
  const double bc = bc_residual(s, prm, default_bc_grid());
  json history = json::array();
  for (const auto& r : s.iterations) history.push_back({r.beta.real(), r.beta.imag()});
  run.summary("mode", "LOCAL");
  run.summary("stop_tol", cfg.stop_tol);
  run.summary("quad_tol", cfg.quad_tol);
  run.summary("eps", prm.eps);
  run.summary("gamma", prm.gamma);
  run.summary("converged", s.converged);
  run.summary("beta_history", history);
  run.summary("residual_sup", s.residual_sup);
  run.summary("bc_residual_over_eps2", bc / (prm.eps * prm.eps));
  run.summary("beta", {s.beta.real(), s.beta.imag()});
  run.summary("notes", s.notes);
  run.finish();
  fmt::print("eps={:.6f} gamma={:.6f} iterations={} converged={} residual={:.3e} bc/eps^2={:.3e} beta={:.6e}{:+.6e}i\n",
             prm.eps, prm.gamma, s.iterations.size() - 1, s.converged, s.residual_sup, bc / (prm.eps * prm.eps),
             s.beta.real(), s.beta.imag());
  return 0;
}

// ---------------------------------------------------------------- validate

int cmd_validate(double gamma, int samples, const std::string& out) {
  require(gamma > 0.0, "--gamma must be positive");
  require(samples >= 100, "--samples must be at least 100");
  json params{{"gamma", gamma}, {"samples", samples}};
  Run run("validate", params, out);
  auto f = run.open("lemma_checks.csv");
  f << "lemma,direction_ok,min_margin,fitted_C1,fitted_C2,first_violation,near_tip_deviation,claim\n";
  int passed = 0;
  for (Lemma id : all_lemmas()) {
    const auto r = check(id, gamma, {}, samples);
    const bool ok = r.direction_ok && (!r.near_tip_checked || r.near_tip_ok);
    passed += ok;
    f << lemma_name(id) << ',' << int(r.direction_ok) << ',' << num(r.min_margin) << ',' << num(r.fitted_C1) << ','
      << num(r.fitted_C2) << ',' << r.first_violation << ','
      << (r.near_tip_checked ? num(r.near_tip_deviation) : std::string()) << ",\"" << r.claim << "\"\n";
    fmt::print("{:5} {}  min_margin={:+.4e}{}\n", lemma_name(id), ok ? "pass" : "FAIL", r.min_margin,
               r.near_tip_checked ? fmt::format(" near_tip_dev={:.3f}", r.near_tip_deviation) : "");
  }
  f.close();
  run.summary("passed", passed);
  run.summary("total", all_lemmas().size());
  run.finish();
  return 0;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case Errc::regime:
    case Errc::domain:
    case Errc::family_mismatch: return 3;
    default: return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selection spectrum of Saffman-Taylor fingers with kinetic undercooling"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker count for alpha scans (default: FINGER_SELECT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  SpectrumArgs sa;
  auto* sp = app.add_subcommand("spectrum", "scan S(alpha), refine its roots, tabulate lambda_n");
  auto* oc = sp->add_option("--c", sa.c, "undercooling parameter");
  auto* oe = sp->add_option("--eps", sa.eps, "fixed eps");
  sp->add_option("--alpha-min", sa.alpha_min)->capture_default_str();
  sp->add_option("--alpha-max", sa.alpha_max)->capture_default_str();
  sp->add_option("--step", sa.step)->capture_default_str();
  sp->add_option("--tol", sa.tol)->capture_default_str();
  sp->add_option("--refine-tol", sa.refine_tol)->capture_default_str();
  sp->add_option("--eta-m", sa.eta_m)->capture_default_str();
  sp->add_option("--rho-start", sa.rho_start)->capture_default_str();
  sp->add_option("--threads", sa.threads, "worker count");
  sp->add_option("--out", sa.out)->capture_default_str();

  InnerArgs ia;
  auto* in = app.add_subcommand("inner", "integrate the inner equation along the standard path");
  in->add_option("--alpha", ia.alpha)->capture_default_str();
  in->add_option("--rho-start", ia.rho_start)->capture_default_str();
  in->add_option("--tol", ia.tol)->capture_default_str();
  in->add_option("--form", ia.form, "eta or y")->capture_default_str();
  in->add_option("--out", ia.out)->capture_default_str();

  ShapeArgs sh;
  auto* shc = app.add_subcommand("shape", "sample the finger boundary");
  shc->add_option("--lambda", sh.lambda)->capture_default_str();
  shc->add_option("--c", sh.c, "undercooling (0: exact zero-regularization finger)")->capture_default_str();
  shc->add_option("--n", sh.n)->capture_default_str();
  shc->add_option("--out", sh.out)->capture_default_str();

  OuterArgs oa;
  auto* ou = app.add_subcommand("outer", "LOCAL-mode Picard iteration for the outer correction");
  ou->add_option("--lambda", oa.lambda)->capture_default_str();
  ou->add_option("--c", oa.c)->capture_default_str();
  ou->add_option("--iters", oa.iters)->capture_default_str();
  ou->add_option("--nodes", oa.nodes)->capture_default_str();
  ou->add_flag("--reflect-current", oa.reflect_current, "reflect F_-' from the current iterate");
  ou->add_option("--out", oa.out)->capture_default_str();

  double gamma = 1.0;
  int samples = 400;
  std::string vout = "out";
  auto* va = app.add_subcommand("validate", "run the descent-contour checks");
  va->add_option("--gamma", gamma)->capture_default_str();
  va->add_option("--samples", samples)->capture_default_str();
  va->add_option("--out", vout)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (threads > 0 && sa.threads == 0) sa.threads = threads;

  try {
    if (sp->parsed()) return cmd_spectrum(sa, oc->count() > 0, oe->count() > 0);
    if (in->parsed()) return cmd_inner(ia);
    if (shc->parsed()) return cmd_shape(sh);
    if (ou->parsed()) return cmd_outer(oa);
    if (va->parsed()) return cmd_validate(gamma, samples, vout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
