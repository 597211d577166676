#include "fingersel/outerp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "fingersel/appendixcheck.hpp"
#include "fingersel/errors.hpp"

namespace fsel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx I1{0.0, 1.0};

double sup_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (auto z : v) m = std::max(m, std::abs(z));
  return m;
}

// sqrt(z_k) tracked for continuity starting from `ref`
std::vector<cplx> sqrt_track(const std::vector<cplx>& z, cplx ref) {
  std::vector<cplx> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    out[j] = sqrt_near(z[j], ref);
    ref = out[j];
  }
  return out;
}

// E_n(a) = int_0^1 s^n e^{a s} ds for n = 0, 1, 2
std::array<cplx, 3> exp_moments(cplx a) {
  if (std::abs(a) < 1.0) {
    std::array<cplx, 3> e{0.0, 0.0, 0.0};
    cplx term = 1.0;  // a^k / k!
    for (int k = 0; k < 30; ++k) {
      for (int n = 0; n < 3; ++n) e[static_cast<std::size_t>(n)] += term / double(n + k + 1);
      term *= a / double(k + 1);
    }
    return e;
  }
  const cplx ea = std::exp(a);
  return {(ea - 1.0) / a, (ea * (a - 1.0) + 1.0) / (a * a), (ea * (a * a - 2.0 * a + 2.0) - 2.0) / (a * a * a)};
}

// Fornberg weights for the first derivative at x0 from stencil points x
std::vector<double> fornberg_d1(double x0, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(2, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
             k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
      c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][1];
  return w;
}

// derivative in xi of nodal data through a 5-point stencil in u = log(-xi)
std::vector<cplx> d_dxi(const std::vector<cplx>& f, const OuterContour& c) {
  const int n = static_cast<int>(f.size());
  std::vector<cplx> d(f.size());
  for (int j = 0; j < n; ++j) {
    const int lo = std::clamp(j - 2, 0, n - 5);
    std::vector<double> uu(5);
    for (int k = 0; k < 5; ++k) uu[static_cast<std::size_t>(k)] = c.u[static_cast<std::size_t>(lo + k)];
    const auto w = fornberg_d1(c.u[static_cast<std::size_t>(j)], uu);
    cplx acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += w[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(lo + k)];
    d[static_cast<std::size_t>(j)] = acc / c.xi[static_cast<std::size_t>(j)];
  }
  return d;
}

// 5-point Lagrange interpolation in u
cplx interp_u(const std::vector<cplx>& f, const OuterContour& c, double u) {
  const int n = static_cast<int>(f.size());
  // nodes decrease in u from the far end to the tip
  int j = 0;
  while (j + 1 < n && c.u[static_cast<std::size_t>(j + 1)] > u) ++j;
  const int lo = std::clamp(j - 2, 0, n - 5);
  cplx acc = 0.0;
  for (int a = 0; a < 5; ++a) {
    double l = 1.0;
    for (int b = 0; b < 5; ++b)
      if (a != b)
        l *= (u - c.u[static_cast<std::size_t>(lo + b)]) /
             (c.u[static_cast<std::size_t>(lo + a)] - c.u[static_cast<std::size_t>(lo + b)]);
    acc += l * f[static_cast<std::size_t>(lo + a)];
  }
  return acc;
}

struct NParts {
  std::vector<cplx> N, G6, G7, G8;
};

NParts assemble_N(const std::vector<cplx>& p, const std::vector<cplx>& dpF, const OuterFields& f,
                  const Params& prm) {
  const double e2 = prm.eps * prm.eps;
  const std::size_t n = p.size();
  std::vector<cplx> V(n), W(n), V2m4(n), W2m4(n);
  for (std::size_t j = 0; j < n; ++j) {
    V[j] = f.V0[j] + p[j];
    W[j] = V[j] + f.Itilde[j];
    V2m4[j] = V[j] * V[j] - 4.0;
    W2m4[j] = W[j] * W[j] - 4.0;
  }
  const auto sV = sqrt_track(V2m4, f.sV0.front());
  const auto sW = sqrt_track(W2m4, f.sV0.front());
  NParts out;
  out.N.resize(n);
  out.G6.resize(n);
  out.G7.resize(n);
  out.G8.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // on the real axis the reflection point is the node itself
    const cplx Fm = std::conj(e2 * (dpF[j] - f.Qp[j] + f.V0p[j]));
    out.G6[j] = Fm * (-W[j] * W[j] + W[j] * sW[j] + 2.0) / 2.0;
    const cplx It = f.Itilde[j];
    const cplx J = 2.0 * V[j] * It + It * It;
    out.G7[j] = -J * f.Hb[j] / 2.0 + 0.5 * f.Hb[j] * J * (V2m4[j] + W[j] * W[j]) / (W[j] * sW[j] + V[j] * sV[j]);
    out.G8[j] = eval_G8_branch(p[j], f.V0[j], f.sV0[j], sV[j], f.Hb[j]);
    out.N[j] = e2 * (f.Qp[j] - f.V0p[j]) + out.G6[j] + out.G7[j] + out.G8[j];
  }
  return out;
}

}  // namespace

cplx sqrt_near(cplx z, cplx ref) {
  const cplx s = std::sqrt(z);
  return std::abs(s - ref) <= std::abs(-s - ref) ? s : -s;
}

// ---------------------------------------------------------------- contour

OuterContour build_contour(const Params& prm, const OuterConfig& cfg) {
  const double g = prm.gamma;
  if (cfg.nodes < 10) throw Error(Errc::domain, "need at least 10 contour nodes");
  if (!(cfg.nu_tip > 0.0 && cfg.r_far > 1.0)) throw Error(Errc::domain, "need nu_tip > 0 and r_far > 1");

  if (cfg.contour == ContourKind::rl_joined) {
    // r_l from far away in to -ib, then straight to the tip ball; validated before use
    ComplexPath path = ComplexPath::ray_in(-I1 * cfg.b, kPi + cfg.alpha0, cfg.r_far);
    path.line_to(cplx(-cfg.nu_tip, 0.0));
    const int m = 4000;
    for (std::size_t k = 0; k < path.pieces().size(); ++k) {
      const Piece& pc = path.pieces()[k];
      for (int i = 0; i <= m; ++i) {
        const double s = pc.length() * i / m;
        const double d = dReP_ds(pc.at(s), pc.tangent(s), g);
        if (d <= 0.0) {
          std::ostringstream msg;
          msg << "Re P does not increase toward the tip along the r_l contour at t=" << pc.at(s);
          throw Error(Errc::not_descent, msg.str());
        }
      }
    }
    throw Error(Errc::not_implemented, "r_l contour passed validation but only the real-axis Picard grid is implemented");
  }

  OuterContour c;
  c.kind = cfg.contour;
  const int n = cfg.nodes;
  const double ua = std::log(cfg.r_far), ub = std::log(cfg.nu_tip);
  c.u.resize(static_cast<std::size_t>(n));
  c.xi.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double sg = static_cast<double>(j) / (n - 1);
    const double w = std::tanh(cfg.grade_kappa * sg) / std::tanh(cfg.grade_kappa);
    c.u[static_cast<std::size_t>(j)] = ua + (ub - ua) * w;
  }
  c.u.front() = ua;
  c.u.back() = ub;
  for (int j = 0; j < n; ++j) c.xi[static_cast<std::size_t>(j)] = -std::exp(c.u[static_cast<std::size_t>(j)]);
  c.xi.front() = -cfg.r_far;
  c.xi.back() = -cfg.nu_tip;
  c.path = ComplexPath::segment(c.xi.front(), c.xi.back());

  // P by 10-point Gauss-Legendre panels in u
  using GL = boost::math::quadrature::gauss<double, 10>;
  c.P.resize(static_cast<std::size_t>(n));
  c.P[0] = eval_P(c.xi[0], g, 1e-13);
  for (int j = 0; j + 1 < n; ++j) {
    const double um = 0.5 * (c.u[static_cast<std::size_t>(j)] + c.u[static_cast<std::size_t>(j + 1)]);
    const double du = 0.5 * (c.u[static_cast<std::size_t>(j + 1)] - c.u[static_cast<std::size_t>(j)]);
    auto h = [&](double x) -> cplx {
      const double t = -std::exp(um + du * x);
      return eval_Qtilde(t, g) * t;
    };
    c.P[static_cast<std::size_t>(j + 1)] = c.P[static_cast<std::size_t>(j)] + GL::integrate(h) * du;
  }
  // descent gate: Re P must increase toward the tip at every node and over every panel
  for (int j = 0; j < n; ++j) {
    if (dReP_ds(c.xi[static_cast<std::size_t>(j)], 1.0, g) <= 0.0)
      throw Error(Errc::not_descent, "contour node is not on a descent path");
    if (j + 1 < n && c.P[static_cast<std::size_t>(j + 1)].real() <= c.P[static_cast<std::size_t>(j)].real())
      throw Error(Errc::not_descent, "Re P is not increasing toward the tip");
  }
  ContourParams cp;
  cp.a1 = -cfg.r_far;
  cp.b1 = -cfg.nu_tip;
  if (!check(Lemma::L6_1, g, cp, 1000).direction_ok)
    throw Error(Errc::not_descent, "negative real axis failed the descent check");
  return c;
}

// ---------------------------------------------------------------- p = 0 nonlocal correction

namespace {

}  // namespace

cplx itilde_integrand(cplx t, const Params& prm, double tol) {
  const double g = prm.gamma, e2 = prm.eps * prm.eps;
  const cplx Ip = cauchy_Iprime(t, g, tol);
  const cplx Fp = -e2 * (-I1 * g / kPi * Ip);
  const cplx tb = std::conj(t);
  const cplx Qp_below = -I1 * g / kPi * std::conj(Ip);
  const cplx Fm = std::conj(e2 * (eval_V0prime(tb, g) - Qp_below));
  const cplx Hh = eval_H(t, g), Hbh = eval_Hbar(t, g);
  const cplx G50 = sroot(t, g) / (t * t + 1.0);
  const cplx G5 = G50 * std::sqrt((1.0 + Fp / Hh) * (1.0 + Fm / Hbh));
  return (Fp - Fm) / G5 + ((Hh - Hbh) / G50) * (-Fp * Fm - Fp * Hbh - Fm * Hh) / (G5 * (G50 + G5));
}

namespace {

cplx g_at_zero(const Params& prm, cplx Qp0) {
  const double g = prm.gamma, e2 = prm.eps * prm.eps;
  const cplx Fp = -e2 * Qp0;  // V0'(0) = 0
  const cplx Fm = std::conj(e2 * (0.0 - Qp0));
  const cplx Hh = I1 * g, Hbh = -I1 * g, G50 = g;
  const cplx G5 = G50 * std::sqrt((1.0 + Fp / Hh) * (1.0 + Fm / Hbh));
  return (Fp - Fm) / G5 + ((Hh - Hbh) / G50) * (-Fp * Fm - Fp * Hbh - Fm * Hh) / (G5 * (G50 + G5));
}

}  // namespace

ItildeRule build_itilde(const Params& prm, const OuterConfig& cfg) {
  const double g = prm.gamma;
  ItildeRule r;
  r.theta = cfg.phi0 + cfg.mu / 4.0;
  const double R2 = cfg.r2_outer;
  ComplexPath path = ComplexPath::ray_in(0.0, kPi - r.theta, R2, cfg.r2_tail_decay);
  path.ray_out(r.theta, R2, cfg.r2_tail_decay);

  // radial panel edges: one panel to r2_inner, then 8 per decade
  std::vector<double> rho{0.0};
  const double d0 = std::log10(cfg.r2_inner), d1 = std::log10(R2);
  const int nd = static_cast<int>(std::ceil((d1 - d0) * 8.0));
  for (int k = 0; k <= nd; ++k) rho.push_back(std::pow(10.0, d0 + (d1 - d0) * k / nd));
  rho.back() = R2;
  std::vector<double> sb;
  for (auto it = rho.rbegin(); it != rho.rend(); ++it) sb.push_back(R2 - *it);
  for (std::size_t k = 1; k < rho.size(); ++k) sb.push_back(R2 + rho[k]);
  r.rule = composite_gauss(path, sb, 12);

  const cplx Qp0 = -I1 * g / kPi * cauchy_Iprime_below(0.0, g, cfg.quad_tol);
  r.g0 = g_at_zero(prm, Qp0);
  r.g.resize(r.rule.t.size());
  for (std::size_t k = 0; k < r.rule.t.size(); ++k) r.g[k] = itilde_integrand(r.rule.t[k], prm, cfg.quad_tol);
  for (const Piece& pc : path.pieces()) r.far_ends.emplace_back(pc, itilde_integrand(pc.far_end(), prm, cfg.quad_tol));
  return r;
}

cplx ItildeRule::operator()(cplx xi) const {
  CompensatedSum acc;
  for (std::size_t k = 0; k < rule.t.size(); ++k) {
    const cplx chi = std::abs(rule.t[k]) < 1.0 ? g0 : cplx(0.0);
    acc.add(rule.w[k] * (g[k] - chi) / (rule.t[k] - xi));
  }
  acc.add(g0 * (std::log(std::polar(1.0, theta) - xi) - std::log(std::polar(1.0, kPi - theta) - xi)));
  for (const auto& [pc, gf] : far_ends) {
    const cplx gT = gf;
    acc.add(ray_tail_estimate(pc, [&](cplx t) { return gT / (t - xi); }));
  }
  return -acc.value() / (2.0 * kPi);
}

OuterFields build_fields(const Params& prm, const OuterContour& c, const OuterConfig& cfg) {
  const double g = prm.gamma;
  const std::size_t n = c.xi.size();
  OuterFields f;
  f.Q.resize(n);
  f.Qp.resize(n);
  f.V0.resize(n);
  f.V0p.resize(n);
  f.Qt.resize(n);
  f.H.resize(n);
  f.Hb.resize(n);
  f.sV0.resize(n);
  f.Itilde.resize(n);
  const cplx k = -I1 * g / kPi;
  const ItildeRule itl = build_itilde(prm, cfg);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = c.xi[j].real();
    f.Q[j] = k * cauchy_I_below(x, g, cfg.quad_tol);
    f.Qp[j] = k * cauchy_Iprime_below(x, g, cfg.quad_tol);
    f.V0[j] = eval_V0(x, g);
    f.V0p[j] = eval_V0prime(x, g);
    f.Qt[j] = eval_Qtilde(x, g);
    f.H[j] = eval_H(x, g);
    f.Hb[j] = eval_Hbar(x, g);
    f.sV0[j] = eval_sqrtV0sq_minus4(x, g);
    f.Itilde[j] = itl(x);
  }
  f.Itilde0 = itl(0.0);
  f.Qp0 = k * cauchy_Iprime_below(0.0, g, cfg.quad_tol);
  f.g0 = itl.g0;
  return f;
}

// ---------------------------------------------------------------- G6, G7, G8

cplx eval_G8_branch(cplx p, cplx V0, cplx sV0, cplx sA, cplx Hb) {
  const cplx b = V0, a = b + p, sB = sV0;
  const cplx D = a * sA + b * sB;
  if (std::abs(sB) < 1e-10 || std::abs(D) < 1e-10 || std::abs(sA + sB) < 1e-10)
    throw Error(Errc::near_singular, "G8 denominator vanishes");
  // cancellation-free rearrangement of the quadratic remainder
  const cplx R = p * p * (2.0 * b + p) * ((2.0 * b + p) * sB - (2.0 * b * b - 4.0) * a / (sA + sB)) / (D * sB);
  return -Hb * p * p / 2.0 + Hb / 2.0 * R;
}

cplx eval_G8(cplx p, cplx xi, const Params& prm) {
  const double g = prm.gamma;
  const cplx V0 = eval_V0(xi, g), sV0 = eval_sqrtV0sq_minus4(xi, g);
  const cplx a = V0 + p;
  return eval_G8_branch(p, V0, sV0, sqrt_near(a * a - 4.0, sV0), eval_Hbar(xi, g));
}

std::pair<cplx, cplx> eval_G6_G7(cplx p, cplx xi, const Params& prm, cplx Itilde, cplx Fminus_prime) {
  const double g = prm.gamma;
  const cplx V0 = eval_V0(xi, g), sV0 = eval_sqrtV0sq_minus4(xi, g), Hb = eval_Hbar(xi, g);
  const cplx V = V0 + p, W = V + Itilde;
  const cplx sV = sqrt_near(V * V - 4.0, sV0), sW = sqrt_near(W * W - 4.0, sV0);
  const cplx den = W * sW + V * sV;
  if (std::abs(den) < 1e-10) throw Error(Errc::near_singular, "G7 denominator vanishes");
  const cplx G6 = Fminus_prime * (-W * W + W * sW + 2.0) / 2.0;
  const cplx J = 2.0 * V * Itilde + Itilde * Itilde;
  const cplx G7 = -J * Hb / 2.0 + 0.5 * Hb * J * ((V * V - 4.0) + W * W) / den;
  return {G6, G7};
}

// ---------------------------------------------------------------- U operator

std::vector<cplx> apply_U(const std::vector<cplx>& N, const OuterContour& c, const Params& prm) {
  const double e2 = prm.eps * prm.eps;
  const std::size_t n = c.xi.size();
  if (N.size() != n) throw Error(Errc::domain, "N must be sampled at every contour node");
  // In the variable P the equation reads eps^2 dp/dP + p = f with f = N/Qtilde, so
  // p_{j+1} = e^{a} p_j + (dP/eps^2) int_0^1 e^{a(1-tau)} f dtau along the chord P_j -> P_{j+1},
  // a = (P_j - P_{j+1})/eps^2; f is interpolated quadratically in P.
  std::vector<cplx> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = N[j] / eval_Qtilde(c.xi[j], prm.gamma);
  std::vector<cplx> p(n);
  // beyond the far node P ~ -i log(-t) and N ~ N0 (R/|t|)^2, which gives p = N0 R/(eps^2 + i)
  const double R = -c.xi[0].real();
  p[0] = N[0] * R / (e2 + I1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const cplx dP = c.P[j + 1] - c.P[j];
    const cplx ea = weight_ratio_from_dP(-dP, prm.eps);
    // moments of the kernel e^{a(1 - tau)} against 1, tau, tau^2 on [0, 1]
    const auto E = exp_moments(-dP / e2);
    const cplx m0 = E[0], m1 = E[0] - E[1], m2 = E[0] - 2.0 * E[1] + E[2];
    cplx acc;
    if (j > 0) {
      const cplx r = (c.P[j] - c.P[j - 1]) / dP;  // previous node sits at tau = -r
      acc = f[j - 1] * (m2 - m1) / (r * (r + 1.0)) - f[j] * (m2 + (r - 1.0) * m1 - r * m0) / r +
            f[j + 1] * (m2 + r * m1) / (1.0 + r);
    } else {
      const cplx q = (c.P[j + 2] - c.P[j + 1]) / dP;  // next-but-one node at tau = 1 + q
      acc = f[j] * (m2 - (2.0 + q) * m1 + (1.0 + q) * m0) / (1.0 + q) - f[j + 1] * (m2 - (1.0 + q) * m1) / q +
            f[j + 2] * (m2 - m1) / (q * (1.0 + q));
    }
    p[j + 1] = ea * p[j] + acc * dP / e2;
  }
  return p;
}

// ---------------------------------------------------------------- beta and Picard

cplx eval_beta(const OuterSolution& sol, const OuterFields& f, const Params& prm, cplx dp0) {
  const double g = prm.gamma, e2 = prm.eps * prm.eps;
  const cplx It0 = f.Itilde0;
  const cplx Fm0 = std::conj(e2 * (0.0 - f.Qp0));
  // sqrt(-4 It0 + It0^2) on the sheet reached by continuation along the contour into the tip
  const std::size_t n = f.V0.size();
  std::vector<cplx> z(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx W = f.V0[j] + f.Itilde[j];
    z[j] = W * W - 4.0;
  }
  cplx r = sqrt_track(z, f.sV0.front()).back();
  const double x_last = sol.contour.xi.back().real();
  const cplx It_last = f.Itilde.back();
  for (int k = 1; k <= 200; ++k) {
    const double x = x_last * (1.0 - k / 200.0);
    const cplx It = It_last + (It0 - It_last) * (1.0 - x / x_last);
    const cplx W = -2.0 * g / std::sqrt(x * x + g * g) + It;
    r = sqrt_near(W * W - 4.0, r);
  }
  const cplx w0 = -2.0 + It0;
  const cplx B0 = 1.0 + 0.5 * (-(w0 * w0) + w0 * r);
  const cplx b6 = (Fm0 + e2 * std::conj(dp0)) * B0;
  const cplx b7 = -I1 * g / 2.0 * (-4.0 * It0 + It0 * It0) - I1 * g / 2.0 * w0 * r;
  return (e2 * f.Qp0 + b6 + b7) / (e2 - g * g + I1 * g);
}

namespace {

struct Prepared {
  OuterContour contour;
  OuterFields fields;
};

Prepared prepare(const Params& prm, const OuterConfig& cfg) {
  Prepared pr;
  pr.contour = build_contour(prm, cfg);
  pr.fields = build_fields(prm, pr.contour, cfg);
  return pr;
}

std::vector<cplx> F_source(const OuterSolution& sol, const OuterConfig& cfg, const std::vector<cplx>& dp_cur) {
  if (cfg.reflect_current) return dp_cur;
  return std::vector<cplx>(sol.p.size(), 0.0);
}

}  // namespace

OuterSolution picard_solve(const Params& prm, const OuterConfig& cfg, OuterMode mode) {
  if (mode == OuterMode::FULL_STUB)
    throw Error(Errc::not_implemented, "FULL mode (nonlocal I(p), F_-'(p) per iterate) is a documented stub");
  if (!(prm.eps > 0.0) || prm.eps > 0.5) throw Error(Errc::regime, "outer iteration needs 0 < eps <= 0.5");
  const double e2 = prm.eps * prm.eps;
  Prepared pr = prepare(prm, cfg);
  const OuterFields& f = pr.fields;

  OuterSolution sol;
  sol.mode = mode;
  sol.contour = pr.contour;
  sol.Itilde0 = f.Itilde0;
  sol.notes.push_back("LOCAL: nonlocal correction and F_-' frozen at their p = 0 values");
  if (cfg.reflect_current) sol.notes.back() = "LOCAL: F_-' reflected from the current iterate";
  sol.notes.push_back("beta_{6,0} uses the p = 0 reflection value of F_-'(0)");

  const std::size_t n = sol.contour.xi.size();
  sol.beta0 = eval_beta(sol, f, prm, 0.0);
  sol.beta = sol.beta0;
  sol.p.resize(n);
  std::vector<cplx> dp_cur(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx x = sol.contour.xi[j];
    sol.p[j] = sol.beta0 * x / (x * x + 1.0);
    dp_cur[j] = sol.beta0 * (1.0 - x * x) / ((x * x + 1.0) * (x * x + 1.0));
  }
  sol.seed = sol.p;
  sol.iterations.push_back({0, 0.0, sol.beta0});

  int growth = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const NParts np = assemble_N(sol.p, F_source(sol, cfg, dp_cur), f, prm);
    std::vector<cplx> pn = apply_U(np.N, sol.contour, prm);
    for (std::size_t j = 0; j < n; ++j) dp_cur[j] = (np.N[j] - f.Qt[j] * pn[j]) / e2;
    const cplx beta_n = eval_beta(sol, f, prm, sol.beta);
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(pn[j] - sol.p[j]));
    if (!std::isfinite(diff)) throw Error(Errc::divergence, "iterate became non-finite");
    if (sol.iterations.size() >= 2 && diff > sol.iterations.back().diff)
      ++growth;
    else
      growth = 0;
    sol.iterations.push_back({it, diff, beta_n});
    sol.p = std::move(pn);
    sol.beta = beta_n;
    if (growth >= 3) {
      std::ostringstream msg;
      msg << "iterate differences grew for 3 consecutive iterations:";
      for (const auto& r : sol.iterations) msg << ' ' << r.diff;
      throw Error(Errc::divergence, msg.str());
    }
    if (diff < cfg.stop_tol) {
      sol.converged = true;
      break;
    }
  }
  sol.dp = d_dxi(sol.p, sol.contour);
  const NParts np = assemble_N(sol.p, cfg.reflect_current ? sol.dp : std::vector<cplx>(n, 0.0), f, prm);
  sol.max_G6 = sup_abs(np.G6);
  sol.max_G7 = sup_abs(np.G7);
  sol.max_G8 = sup_abs(np.G8);
  double scale = 0.0, res = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    scale = std::max(scale, std::abs(e2 * (f.Qp[j] - f.V0p[j])));
    res = std::max(res, std::abs(e2 * sol.dp[j] + f.Qt[j] * sol.p[j] - np.N[j]));
  }
  sol.residual_sup = res / scale;
  return sol;
}

std::vector<double> outer_residual(const OuterSolution& sol, const Params& prm, const OuterConfig& cfg) {
  const double e2 = prm.eps * prm.eps;
  const OuterFields f = build_fields(prm, sol.contour, cfg);
  const std::size_t n = sol.p.size();
  const NParts np = assemble_N(sol.p, cfg.reflect_current ? sol.dp : std::vector<cplx>(n, 0.0), f, prm);
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(e2 * (f.Qp[j] - f.V0p[j])));
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j)
    r[j] = std::abs(e2 * sol.dp[j] + f.Qt[j] * sol.p[j] - np.N[j]) / scale;
  return r;
}

// ---------------------------------------------------------------- boundary condition

double bc_residual_fields(const Field& F, const Field& Fp, double eps, double gamma, const std::vector<double>& grid) {
  double m = 0.0;
  for (double x : grid) {
    const cplx Fx = F(x), w = Fp(x) + eval_H(x, gamma);
    const double aw = std::abs(w);
    const double r = std::abs(Fx.real() + eps * eps * (aw > 0.0 ? w.imag() / aw : 0.0));
    m = std::max(m, r);
  }
  return m;
}

double bc_residual(const OuterSolution& sol, const Params& prm, const std::vector<double>& grid) {
  const double g = prm.gamma, e2 = prm.eps * prm.eps;
  const double lo = -sol.contour.xi.back().real(), hi = -sol.contour.xi.front().real();
  const cplx k = -I1 * g / kPi;
  // values on the negative axis come from the contour; the positive axis follows by the
  // finger's reflection symmetry F(-x) = conj F(x)
  auto on_negative = [&](double x, cplx& F, cplx& Fp) {
    const double u = std::log(-x);
    const cplx p = interp_u(sol.p, sol.contour, u), dp = interp_u(sol.dp, sol.contour, u);
    F = e2 * (p - k * cauchy_I_below(x, g) + eval_V0(x, g));
    Fp = e2 * (dp - k * cauchy_Iprime_below(x, g) + eval_V0prime(x, g));
  };
  double m = 0.0;
  for (double x : grid) {
    const double ax = std::abs(x);
    if (ax < lo * (1 - 1e-12) || ax > hi * (1 + 1e-12))
      throw Error(Errc::continuation_fail, "grid point outside the solved contour");
    cplx F, Fp;
    on_negative(-ax, F, Fp);
    if (x > 0) {
      F = std::conj(F);
      Fp = -std::conj(Fp);
    }
    const cplx w = Fp + eval_H(x, g);
    m = std::max(m, std::abs(F.real() + e2 * w.imag() / std::abs(w)));
  }
  return m;
}

std::vector<double> default_bc_grid(int n_per_side) {
  std::vector<double> g;
  for (int k = 0; k < n_per_side; ++k) {
    const double a = 0.1 * std::pow(200.0, static_cast<double>(k) / (n_per_side - 1));
    g.push_back(-a);
    g.push_back(a);
  }
  std::sort(g.begin(), g.end());
  return g;
}

}  // namespace fsel
