#include "fingersel/helegeom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fingersel/errors.hpp"

namespace fsel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx I1{0.0, 1.0};

// w^{a} with the cut along the ray of angle `cut`; arg w taken in (cut - 2pi, cut].
cplx pow_cut(cplx w, double a, double cut) {
  double th = std::arg(w);
  if (cut > 0.0) {
    if (th > cut) th -= 2 * kPi;
  } else {
    if (th < cut) th += 2 * kPi;
  }
  return std::pow(std::abs(w), a) * cplx(std::cos(a * th), std::sin(a * th));
}

void check_cut(cplx xi, double gamma) {
  if (std::abs(xi.real()) <= 1e-14 && std::abs(xi.imag()) > gamma + 1e-14)
    throw Error(Errc::cut, "point lies on a branch cut");
}

void check_pole(cplx xi, cplx p, const char* what) {
  if (std::abs(xi - p) <= 1e-14) throw Error(Errc::pole, what);
}

double binom_half(int j) {
  // binomial(-1/2, j)
  double b = 1.0;
  for (int i = 0; i < j; ++i) b *= (-0.5 - i) / (i + 1);
  return b;
}

}  // namespace

// ---------------------------------------------------------------- parameters

Params params_from(double lambda, double c) {
  if (!(lambda > 0.0 && lambda < 1.0) || !(c > 0.0))
    throw Error(Errc::domain, "need 0 < lambda < 1 and c > 0");
  Params p;
  p.lambda = lambda;
  p.c = c;
  p.gamma = lambda / (1.0 - lambda);
  p.eps = std::sqrt(c * kPi / (2.0 * lambda * (1.0 - lambda)));
  p.alpha = (2.0 * lambda - 1.0) * std::pow(p.eps, -4.0 / 3.0) / (1.0 - lambda);
  return p;
}

Params params_from_gamma_eps(double gamma, double eps) {
  if (!(gamma > 0.0) || !(eps > 0.0)) throw Error(Errc::domain, "need gamma > 0 and eps > 0");
  const double lambda = gamma / (1.0 + gamma);
  const double c = eps * eps * 2.0 * lambda * (1.0 - lambda) / kPi;
  Params p = params_from(lambda, c);
  p.gamma = gamma;
  p.eps = eps;
  return p;
}

double lambda_from_alpha(double alpha, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::domain, "eps must be positive");
  const double ae = alpha * std::pow(eps, 4.0 / 3.0);
  if (!(2.0 + ae > 0.0)) throw Error(Errc::domain, "2 + alpha eps^{4/3} must be positive");
  return (1.0 + ae) / (2.0 + ae);
}

std::string_view fn_name(Fn f) {
  switch (f) {
    case Fn::H: return "H";
    case Fn::Hbar: return "Hbar";
    case Fn::Qtilde: return "Qtilde";
    case Fn::V0: return "V0";
    case Fn::sqrtV0sq_minus4: return "sqrtV0sq_minus4";
    case Fn::P: return "P";
    case Fn::g1: return "g1";
    case Fn::g2: return "g2";
    case Fn::Q: return "Q";
    case Fn::z0: return "z0";
    case Fn::z: return "z";
  }
  return "?";
}

// ---------------------------------------------------------------- closed forms

cplx sqrt_minus(cplx xi, double gamma) { return pow_cut(xi - I1 * gamma, 0.5, kPi / 2); }
cplx sqrt_plus(cplx xi, double gamma) { return pow_cut(xi + I1 * gamma, 0.5, -kPi / 2); }
cplx sroot(cplx xi, double gamma) { return sqrt_plus(xi, gamma) * sqrt_minus(xi, gamma); }

cplx eval_H(cplx xi, double gamma) {
  check_pole(xi, I1, "H pole at i");
  check_pole(xi, -I1, "H pole at -i");
  return (xi + I1 * gamma) / (xi * xi + 1.0);
}

cplx eval_Hbar(cplx xi, double gamma) {
  check_pole(xi, I1, "Hbar pole at i");
  check_pole(xi, -I1, "Hbar pole at -i");
  return (xi - I1 * gamma) / (xi * xi + 1.0);
}

cplx eval_Qtilde(cplx xi, double gamma) {
  check_pole(xi, 0.0, "Qtilde pole at 0");
  check_pole(xi, I1, "Qtilde pole at i");
  check_pole(xi, -I1, "Qtilde pole at -i");
  check_cut(xi, gamma);
  // i (xi + i g)^{3/2} (xi - i g)^{1/2} / (xi (xi^2 + 1))
  return I1 * (xi + I1 * gamma) * sroot(xi, gamma) / (xi * (xi * xi + 1.0));
}

cplx eval_V0(cplx xi, double gamma) {
  check_pole(xi, I1 * gamma, "V0 pole at i gamma");
  check_pole(xi, -I1 * gamma, "V0 pole at -i gamma");
  check_cut(xi, gamma);
  return -2.0 * gamma / sroot(xi, gamma);
}

cplx eval_V0prime(cplx xi, double gamma) {
  const cplx s = sroot(xi, gamma);
  return 2.0 * gamma * xi / (s * s * s);
}

cplx eval_sqrtV0sq_minus4(cplx xi, double gamma) {
  check_pole(xi, I1 * gamma, "pole at i gamma");
  check_pole(xi, -I1 * gamma, "pole at -i gamma");
  check_cut(xi, gamma);
  return -2.0 * I1 * xi / sroot(xi, gamma);
}

// ---------------------------------------------------------------- P, g, weights

namespace {

double seg_point_dist(cplx a, cplx b, cplx p) {
  const cplx d = b - a;
  double u = std::real((p - a) * std::conj(d)) / std::norm(d);
  u = std::clamp(u, 0.0, 1.0);
  return std::abs(a + u * d - p);
}

bool segment_ok(cplx a, cplx b, double gamma) {
  for (cplx p : {cplx(0.0), I1, -I1, I1 * gamma, -I1 * gamma})
    if (seg_point_dist(a, b, p) < 1e-8) return false;
  // crossing the imaginary axis above i gamma or below -i gamma hits a cut
  if ((a.real() < 0) != (b.real() < 0) && a.real() != b.real()) {
    const double u = a.real() / (a.real() - b.real());
    const double y = a.imag() + u * (b.imag() - a.imag());
    if (std::abs(y) > gamma) return false;
  }
  return true;
}

}  // namespace

ComplexPath default_P_path(cplx xi, double gamma) {
  const cplx base(kPBase, 0.0);
  if (std::abs(xi - base) < 1e-300) return {};
  if (segment_ok(base, xi, gamma)) return ComplexPath::segment(base, xi);
  const cplx w = 0.5 * I1 * std::min(1.0, gamma);
  if (segment_ok(base, w, gamma) && segment_ok(w, xi, gamma)) {
    ComplexPath p = ComplexPath::segment(base, w);
    p.line_to(xi);
    return p;
  }
  throw Error(Errc::cut, "no default path from the base point avoids the cuts");
}

cplx eval_P(cplx xi, const ComplexPath& path, double gamma, double tol) {
  if (path.empty()) return 0.0;
  if (std::abs(path.start() - cplx(kPBase, 0.0)) > 1e-14 || std::abs(path.end() - xi) > 1e-12)
    throw Error(Errc::domain, "P path must run from -1 to xi");
  return integrate_quadrature(path, [gamma](cplx t) { return eval_Qtilde(t, gamma); }, tol);
}

cplx eval_P(cplx xi, double gamma, double tol) {
  check_pole(xi, 0.0, "P is logarithmic at 0");
  check_pole(xi, I1, "P is logarithmic at i");
  check_pole(xi, -I1, "P is logarithmic at -i");
  return eval_P(xi, default_P_path(xi, gamma), gamma, tol);
}

cplx eval_g(cplx xi, double eps, GKind which, double gamma) {
  const cplx P = eval_P(xi, gamma);
  if (std::abs(P.real()) / (eps * eps) > 700.0)
    throw Error(Errc::overflow, "|Re P|/eps^2 > 700; use weight_ratio");
  return std::exp((which == GKind::g1 ? -1.0 : 1.0) * P / (eps * eps));
}

cplx weight_ratio_from_dP(cplx dP, double eps, double tol) {
  if (dP.real() > tol) throw Error(Errc::not_descent, "Re P(t) exceeds Re P(xi)");
  return std::exp(dP / (eps * eps));
}

cplx weight_ratio(cplx xi, cplx t, double eps, double gamma, const ComplexPath* path, double tol) {
  if (std::abs(xi - t) == 0.0) return 1.0;
  ComplexPath seg;
  if (!path) {
    if (!segment_ok(xi, t, gamma)) throw Error(Errc::cut, "straight segment from xi to t is blocked");
    seg = ComplexPath::segment(xi, t);
    path = &seg;
  }
  const cplx dP = integrate_quadrature(*path, [gamma](cplx s) { return eval_Qtilde(s, gamma); }, tol);
  return weight_ratio_from_dP(dP, eps, 1e3 * tol);
}

// ---------------------------------------------------------------- Cauchy integral for Q

namespace {

double cut_radius(cplx xi, double gamma) { return std::max({1e3, 20.0 * std::abs(xi), 20.0 * gamma}); }

// int_T^inf of h(t)[1/(t-xi) - 1/(t+xi)] dt and its xi-derivative, h = (t^2+g^2)^{-1/2}
void tails(cplx xi, double gamma, double T, cplx& t0, cplx& t1) {
  const cplx x2 = xi * xi;
  t0 = 0.0;
  t1 = 0.0;
  for (int k = 0; k < 14; ++k) {
    cplx c0 = 0.0, c1 = 0.0;
    for (int j = 0; j <= k; ++j) {
      const int m = k - j;
      const cplx term = binom_half(j) * std::pow(gamma, 2 * j) * std::pow(x2, m);
      c0 += term;
      c1 += term * (2.0 * m + 1.0);
    }
    const double tk = std::pow(T, -2.0 - 2.0 * k) / (2.0 + 2.0 * k);
    t0 += 2.0 * xi * c0 * tk;
    t1 += 2.0 * c1 * tk;
  }
}

struct CauchyParts {
  cplx I;
  cplx Ip;
};

// value and derivative share the real-line geometry; `below` selects the x - i0 boundary value
CauchyParts cauchy(cplx xi, double gamma, double tol, bool want_I, bool want_Ip, bool below) {
  const double T = cut_radius(xi, gamma);
  const cplx v = below ? cplx(std::sqrt(xi.real() * xi.real() + gamma * gamma), 0.0) : sroot(xi, gamma);
  const cplx hxi = 1.0 / v;
  const cplx hpxi = -xi / (v * v * v);
  cplx Lam;
  if (below) {
    const double x = xi.real();
    Lam = cplx(std::log((T - x) / (T + x)), -kPi);
  } else {
    Lam = std::log(cplx(T) - xi) - std::log(cplx(-T) - xi);
  }
  cplx t0, t1;
  tails(xi, gamma, T, t0, t1);
  const ComplexPath line = ComplexPath::segment(-T, T);
  CauchyParts out{};
  if (want_I) {
    auto K0 = [&](cplx tt) {
      const double t = tt.real();
      const double u = std::sqrt(t * t + gamma * gamma);
      return -(t + xi) / (u * v * (u + v));
    };
    out.I = integrate_quadrature(line, K0, tol) + hxi * Lam + t0;
  }
  if (want_Ip) {
    auto K1 = [&](cplx tt) {
      const double t = tt.real();
      const double u = std::sqrt(t * t + gamma * gamma);
      const cplx upv = u + v;
      return -1.0 / (u * v * upv) + xi * (t + xi) * (2.0 * v + u) / (v * v * v * u * upv * upv);
    };
    const cplx ends = -1.0 / (cplx(T) - xi) - 1.0 / (cplx(T) + xi);
    out.Ip = integrate_quadrature(line, K1, tol) + hxi * ends + hpxi * Lam + t1;
  }
  return out;
}

}  // namespace

cplx cauchy_I(cplx xi, double gamma, double tol) {
  if (xi.imag() == 0.0) throw Error(Errc::domain, "Cauchy integral needs Im xi != 0");
  return cauchy(xi, gamma, tol, true, false, false).I;
}

cplx cauchy_Iprime(cplx xi, double gamma, double tol) {
  if (xi.imag() == 0.0) throw Error(Errc::domain, "Cauchy integral needs Im xi != 0");
  return cauchy(xi, gamma, tol, false, true, false).Ip;
}

cplx cauchy_I_below(double x, double gamma, double tol) {
  return cauchy(cplx(x, 0.0), gamma, tol, true, false, true).I;
}

cplx cauchy_Iprime_below(double x, double gamma, double tol) {
  return cauchy(cplx(x, 0.0), gamma, tol, false, true, true).Ip;
}

cplx eval_Q(cplx xi, double gamma, double tol) {
  if (!(xi.imag() < 0.0)) throw Error(Errc::domain, "Q quadrature defined for Im xi < 0");
  return -I1 * gamma / kPi * cauchy_I(xi, gamma, tol * kPi / gamma);
}

cplx eval_Qprime(cplx xi, double gamma, double tol) {
  if (!(xi.imag() < 0.0)) throw Error(Errc::domain, "Q quadrature defined for Im xi < 0");
  return -I1 * gamma / kPi * cauchy_Iprime(xi, gamma, tol * kPi / gamma);
}

// ---------------------------------------------------------------- maps and shapes

cplx map_z0(cplx xi, double lambda) {
  check_pole(xi, I1, "z0 is logarithmic at i");
  check_pole(xi, -I1, "z0 is logarithmic at -i");
  return -std::log(xi - I1) / kPi - (1.0 - 2.0 * lambda) / kPi * std::log(xi + I1) - lambda * I1;
}

cplx map_z(cplx xi, double lambda, const Field& F) {
  const cplx z0 = map_z0(xi, lambda);
  if (!F) return z0;
  return z0 - (2.0 - 2.0 * lambda) / kPi * F(xi);
}

cplx eval(Fn fn, cplx xi, const Params& p) {
  const double g = p.gamma;
  switch (fn) {
    case Fn::H: return eval_H(xi, g);
    case Fn::Hbar: return eval_Hbar(xi, g);
    case Fn::Qtilde: return eval_Qtilde(xi, g);
    case Fn::V0: return eval_V0(xi, g);
    case Fn::sqrtV0sq_minus4: return eval_sqrtV0sq_minus4(xi, g);
    case Fn::P: return eval_P(xi, g);
    case Fn::g1: return eval_g(xi, p.eps, GKind::g1, g);
    case Fn::g2: return eval_g(xi, p.eps, GKind::g2, g);
    case Fn::Q: return eval_Q(xi, g);
    case Fn::z0: return map_z0(xi, p.lambda);
    case Fn::z: return map_z(xi, p.lambda, nullptr);
  }
  throw Error(Errc::domain, "unknown function");
}

std::vector<ShapePoint> shape_sample(double lambda, const Field& F, int n) {
  if (n < 2) throw Error(Errc::domain, "need at least two samples");
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(Errc::domain, "need 0 < lambda < 1");
  std::vector<ShapePoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double xi = std::tan(-kPi / 2 + kPi * (k + 0.5) / n);
    out.push_back({xi, map_z(cplx(xi, 0.0), lambda, F)});
  }
  return out;
}

UnivalenceReport univalence_check(const std::vector<ShapePoint>& poly) {
  UnivalenceReport r;
  const int n = static_cast<int>(poly.size());
  // boundary correspondence: Im z runs monotonically from one tail to the other
  if (n >= 2) {
    const double dir = poly.back().z.imag() - poly.front().z.imag();
    for (int k = 0; k + 1 < n && r.monotone; ++k) {
      const double d = poly[k + 1].z.imag() - poly[k].z.imag();
      if (!(d * dir > 0.0)) {
        r.monotone = false;
        r.first = k;
        r.second = k + 1;
      }
    }
  }
  // pairwise distinctness via lexicographic sort
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = k;
  auto key = [&](int k) { return std::pair(poly[static_cast<std::size_t>(k)].z.real(), poly[static_cast<std::size_t>(k)].z.imag()); };
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return key(a) < key(b) || (key(a) == key(b) && a < b); });
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const cplx za = poly[static_cast<std::size_t>(idx[k])].z, zb = poly[static_cast<std::size_t>(idx[k + 1])].z;
    if (std::abs(za - zb) <= 1e-14 * (1.0 + std::abs(za))) {
      r.injective = false;
      r.first = std::min(idx[k], idx[k + 1]);
      r.second = std::max(idx[k], idx[k + 1]);
      break;
    }
  }
  return r;
}

}  // namespace fsel
