#include "fingersel/cpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fingersel/errors.hpp"

namespace fsel {

namespace {

cplx expi(double th) { return {std::cos(th), std::sin(th)}; }

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

// ---------------------------------------------------------------- Piece

double Piece::length() const {
  switch (kind) {
    case PieceKind::arc:
      return radius * std::abs(dtheta);
    default:
      return std::abs(b - a);
  }
}

cplx Piece::at(double s) const {
  const double len = length();
  if (s <= 0.0) return a;
  if (s >= len) return b;
  if (kind == PieceKind::arc) return center + radius * expi(theta0 + dtheta * (s / len));
  return a + (b - a) * (s / len);
}

cplx Piece::tangent(double s) const {
  if (kind == PieceKind::arc) {
    const double th = theta0 + dtheta * (s / length());
    return expi(th) * cplx(0.0, dtheta > 0 ? 1.0 : -1.0);
  }
  return (b - a) / std::abs(b - a);
}

cplx Piece::far_direction() const {
  const cplx d = (b - a) / std::abs(b - a);
  return inbound ? -d : d;
}

// ---------------------------------------------------------------- ComplexPath

void ComplexPath::push(Piece p) {
  if (!(p.length() > 0.0)) throw Error(Errc::domain, "path piece must have positive length");
  if (!pieces_.empty()) {
    // shared endpoints are enforced by construction, not by tolerance
    p.a = pieces_.back().b;
  }
  if (cum_.empty()) cum_.push_back(0.0);
  cum_.push_back(cum_.back() + p.length());
  pieces_.push_back(p);
}

ComplexPath ComplexPath::segment(cplx a, cplx b) {
  ComplexPath p;
  Piece q;
  q.kind = PieceKind::segment;
  q.a = a;
  q.b = b;
  p.push(q);
  return p;
}

ComplexPath ComplexPath::ray(cplx anchor, double angle, double truncation, double tail_decay) {
  ComplexPath p;
  Piece q;
  q.kind = PieceKind::ray;
  q.a = anchor;
  q.b = anchor + truncation * expi(angle);
  q.tail_decay = tail_decay;
  p.push(q);
  return p;
}

ComplexPath ComplexPath::ray_in(cplx anchor, double angle, double truncation, double tail_decay) {
  ComplexPath p;
  Piece q;
  q.kind = PieceKind::ray;
  q.inbound = true;
  q.a = anchor + truncation * expi(angle);
  q.b = anchor;
  q.tail_decay = tail_decay;
  p.push(q);
  return p;
}

ComplexPath ComplexPath::arc(cplx center, double radius, double theta0, double theta1) {
  ComplexPath p;
  Piece q;
  q.kind = PieceKind::arc;
  q.center = center;
  q.radius = radius;
  q.theta0 = theta0;
  q.dtheta = theta1 - theta0;
  q.a = center + radius * expi(theta0);
  q.b = center + radius * expi(theta1);
  p.push(q);
  return p;
}

ComplexPath& ComplexPath::line_to(cplx b) {
  Piece q;
  q.kind = PieceKind::segment;
  q.a = end();
  q.b = b;
  push(q);
  return *this;
}

ComplexPath& ComplexPath::arc_to(cplx center, double theta1) {
  const cplx a = end();
  Piece q;
  q.kind = PieceKind::arc;
  q.center = center;
  q.radius = std::abs(a - center);
  q.theta0 = std::arg(a - center);
  q.dtheta = theta1 - q.theta0;
  q.a = a;
  q.b = center + q.radius * expi(theta1);
  push(q);
  return *this;
}

ComplexPath& ComplexPath::ray_out(double angle, double truncation, double tail_decay) {
  Piece q;
  q.kind = PieceKind::ray;
  q.a = end();
  q.b = q.a + truncation * expi(angle);
  q.tail_decay = tail_decay;
  push(q);
  return *this;
}

ComplexPath& ComplexPath::append(const ComplexPath& other) {
  if (!empty() && !other.empty() && std::abs(other.start() - end()) > 1e-12 * (1.0 + std::abs(end())))
    throw Error(Errc::domain, "appended path does not start at the current end");
  for (const auto& p : other.pieces_) push(p);
  return *this;
}

ComplexPath ComplexPath::reversed() const {
  ComplexPath r;
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
    Piece q = *it;
    std::swap(q.a, q.b);
    if (q.kind == PieceKind::arc) {
      q.theta0 += q.dtheta;
      q.dtheta = -q.dtheta;
    }
    if (q.kind == PieceKind::ray) q.inbound = !q.inbound;
    r.push(q);
  }
  return r;
}

cplx ComplexPath::start() const { return pieces_.front().a; }
cplx ComplexPath::end() const { return pieces_.back().b; }

std::size_t ComplexPath::piece_index(double s) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t k = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
  return std::min(k, pieces_.size() - 1);
}

cplx ComplexPath::at(double s) const {
  const auto k = piece_index(s);
  return pieces_[k].at(s - cum_[k]);
}

cplx ComplexPath::tangent(double s) const {
  const auto k = piece_index(s);
  return pieces_[k].tangent(s - cum_[k]);
}

// ---------------------------------------------------------------- Trace

double Trace::max_residual() const {
  double m = 0.0;
  for (const auto& x : samples) m = std::max(m, x.residual);
  return m;
}

const TraceSample* Trace::find(cplx t, double eps) const {
  for (const auto& x : samples)
    if (std::abs(x.t - t) <= eps) return &x;
  return nullptr;
}

// ---------------------------------------------------------------- Dormand-Prince 5(4)

namespace {

namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output (Hairer's contd5)
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

struct Dense {
  cplx r1, r2, r3, r4, r5;
  cplx operator()(double th) const {
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

}  // namespace

Trace integrate_ode(const ComplexPath& path, const OdeRhs& rhs, cplx initial, double tol,
                    const OdeOptions& opt) {
  if (!(tol > 0.0)) throw Error(Errc::domain, "tol must be positive");
  if (path.empty()) throw Error(Errc::domain, "empty path");

  Trace tr;
  tr.tol = tol;
  const double hmin = 1e-14 * path.length();
  const double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  const double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  const auto& gk = boost::math::quadrature::gauss<double, 7>::abscissa();
  const auto& gw = boost::math::quadrature::gauss<double, 7>::weights();

  cplx y = initial;
  const cplx t0 = path.start();
  tr.samples.push_back({0.0, t0, y, rhs(t0, y), 0.0});

  double h = opt.h_init;
  double facold = 1e-4;
  long steps = 0;
  const auto& cum = path.breakpoints();

  for (std::size_t k = 0; k < path.pieces().size(); ++k) {
    const Piece& pc = path.pieces()[k];
    const double len = pc.length();
    auto f = [&](double s, cplx yy) {
      const cplx t = pc.at(s);
      return rhs(t, yy) * pc.tangent(s);
    };
    double s = 0.0;
    cplx k1 = f(0.0, y);
    h = std::min(h, len);
    bool last = false;
    while (!last) {
      if (++steps > opt.max_steps) throw Error(Errc::no_convergence, "ODE step budget exhausted");
      if (s + 1.01 * h >= len) {
        h = len - s;
        last = true;
      }
      if (h < hmin && !last) throw Error(Errc::step_underflow, "step size underflow near t=" +
                                                                std::to_string(pc.at(s).real()) +
                                                                "+" + std::to_string(pc.at(s).imag()) + "i");
      using namespace dp;
      const cplx k2 = f(s + c2 * h, y + h * (a21 * k1));
      const cplx k3 = f(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
      const cplx k4 = f(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const cplx k5 = f(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const cplx k6 = f(s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const cplx y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      const cplx k7 = f(s + h, y1);
      const cplx errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      if (!finite(y1) || !finite(errv) || std::abs(y1) > 1e300)
        throw Error(Errc::nonfinite, "solution overflowed");
      const double sc = tol * std::max({1.0, std::abs(y), std::abs(y1)});
      const double err = std::abs(errv) / sc;
      const double fac11 = std::pow(std::max(err, 1e-300), expo1);
      if (err <= 1.0) {
        Dense dn;
        dn.r1 = y;
        dn.r2 = y1 - y;
        dn.r3 = h * k1 - dn.r2;
        dn.r4 = dn.r2 - h * k7 - dn.r3;
        dn.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        // integral-form defect of the dense interpolant over the step
        CompensatedSum acc;
        for (std::size_t i = 0; i < gk.size(); ++i) {
          const double xs[2] = {gk[i], -gk[i]};
          for (int j = 0; j < (gk[i] == 0.0 ? 1 : 2); ++j) {
            const double th = 0.5 * (1.0 + xs[j]);
            acc.add(0.5 * h * gw[i] * f(s + th * h, dn(th)));
          }
        }
        const double resid = std::abs(y1 - y - acc.value());

        s = last ? len : s + h;
        y = y1;
        k1 = k7;
        facold = std::max(err, 1e-4);
        const cplx t = pc.at(s);
        tr.samples.push_back({cum[k] + s, t, y, k7 / pc.tangent(s), resid});
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        h = h / fac;
      } else {
        h = h / std::min(facc1, fac11 / safe);
        last = false;
        ++tr.rejected;
      }
    }
  }
  return tr;
}

cplx integrate_ode_rk4(const ComplexPath& path, const OdeRhs& rhs, cplx initial, double h) {
  cplx y = initial;
  for (const Piece& pc : path.pieces()) {
    const double len = pc.length();
    const long n = std::max(1L, static_cast<long>(std::ceil(len / h)));
    const double hh = len / static_cast<double>(n);
    auto f = [&](double s, cplx yy) { return rhs(pc.at(s), yy) * pc.tangent(s); };
    for (long i = 0; i < n; ++i) {
      const double s = hh * static_cast<double>(i);
      const cplx k1 = f(s, y);
      const cplx k2 = f(s + hh / 2, y + hh / 2 * k1);
      const cplx k3 = f(s + hh / 2, y + hh / 2 * k2);
      const cplx k4 = f(s + hh, y + hh * k3);
      y += hh / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return y;
}

// ---------------------------------------------------------------- quadrature

void CompensatedSum::add(cplx v) {
  auto nm = [](double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  };
  nm(sr_, cr_, v.real());
  nm(si_, ci_, v.imag());
}

cplx ray_tail_estimate(const Piece& ray, const Integrand& f) {
  if (ray.kind != PieceKind::ray || ray.tail_decay <= 1.0) return 0.0;
  const cplx T = ray.far_end();
  const cplx d = ray.far_direction();
  // integral of f(T)(|T|/|t|)^k from T outward; orientation flips for inbound rays
  const cplx tail = f(T) * d * std::abs(T) / (ray.tail_decay - 1.0);
  return ray.inbound ? -tail : tail;
}

namespace {

struct Panel {
  std::size_t piece;
  double lo, hi;
  cplx value;
  double err;
  double key;         // err, or 0 once err is at the round-off floor of the panel
  std::size_t order;  // insertion order; breaks ties deterministically
};

struct PanelLess {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.key != y.key) return x.key < y.key;
    return x.order > y.order;
  }
};

}  // namespace

QuadResult integrate_quadrature_ex(const ComplexPath& path, const Integrand& f, double tol,
                                   const QuadOptions& opt) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (!(tol > 0.0)) throw Error(Errc::domain, "tol must be positive");
  std::size_t counter = 0;
  auto eval = [&](std::size_t k, double lo, double hi) {
    const Piece& pc = path.pieces()[k];
    double err = 0.0;
    auto g = [&](double s) -> cplx { return f(pc.at(s)) * pc.tangent(s); };
    const cplx v = GK::integrate(g, lo, hi, 0, 0.0, &err);
    if (!finite(v)) throw Error(Errc::nonfinite, "integrand not finite on path");
    // Boost reports the error of the rule mapped to [-1, 1]; rescale to the panel
    const double w = hi - lo;
    err *= 0.5 * w;
    // splitting cannot push the error estimate below the rounding noise of the panel
    double mag = w * std::max({std::abs(g(lo + 0.25 * w)), std::abs(g(lo + 0.5 * w)), std::abs(g(lo + 0.75 * w))});
    if (!std::isfinite(mag)) mag = 0.0;
    const double key = err > 100.0 * std::numeric_limits<double>::epsilon() * mag ? err : 0.0;
    return Panel{k, lo, hi, v, err, key, counter++};
  };

  std::priority_queue<Panel, std::vector<Panel>, PanelLess> heap;
  double total_err = 0.0;
  cplx tails = 0.0;
  for (std::size_t k = 0; k < path.pieces().size(); ++k) {
    const Piece& pc = path.pieces()[k];
    // seed long pieces with several panels so the first error estimates are meaningful
    const int n0 = pc.kind == PieceKind::segment && pc.length() < 1.0 ? 1 : 4;
    for (int i = 0; i < n0; ++i) {
      Panel p = eval(k, pc.length() * i / n0, pc.length() * (i + 1) / n0);
      total_err += p.err;
      heap.push(p);
    }
    tails += ray_tail_estimate(pc, f);
  }
  int panels = static_cast<int>(heap.size());
  while (total_err > tol) {
    if (panels >= opt.max_panels)
      throw Error(Errc::no_convergence, "quadrature did not converge (error " + std::to_string(total_err) + ")");
    if (heap.top().key == 0.0) break;  // every panel is at its round-off floor
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi))
      throw Error(Errc::no_convergence, "quadrature panel collapsed (undeclared singularity?)");
    Panel l = eval(worst.piece, worst.lo, mid);
    Panel r = eval(worst.piece, mid, worst.hi);
    total_err += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
    ++panels;
    // recompute the running error occasionally to stop drift from cancellation
    if (panels % 256 == 0) {
      auto copy = heap;
      total_err = 0.0;
      while (!copy.empty()) {
        total_err += copy.top().err;
        copy.pop();
      }
    }
  }
  // sum in path order so the result does not depend on heap layout
  std::vector<Panel> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) {
    return x.piece != y.piece ? x.piece < y.piece : x.lo < y.lo;
  });
  CompensatedSum acc;
  for (const auto& p : all) acc.add(p.value);
  acc.add(tails);
  return {acc.value(), total_err, panels};
}

cplx integrate_quadrature(const ComplexPath& path, const Integrand& f, double tol) {
  return integrate_quadrature_ex(path, f, tol).value;
}

namespace {

template <int N>
void push_gauss(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& b = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      x.push_back(0.0);
      w.push_back(b[i]);
    } else {
      x.push_back(-a[i]);
      w.push_back(b[i]);
      x.push_back(a[i]);
      w.push_back(b[i]);
    }
  }
}

}  // namespace

NodeRule composite_gauss(const ComplexPath& path, const std::vector<double>& s_breaks, int order) {
  std::vector<double> gx, gw;
  switch (order) {
    case 8: push_gauss<8>(gx, gw); break;
    case 10: push_gauss<10>(gx, gw); break;
    case 12: push_gauss<12>(gx, gw); break;
    case 20: push_gauss<20>(gx, gw); break;
    default: throw Error(Errc::domain, "unsupported Gauss order");
  }
  // keep nodes ordered along each panel
  std::vector<std::size_t> idx(gx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return gx[i] < gx[j]; });
  NodeRule r;
  for (std::size_t p = 0; p + 1 < s_breaks.size(); ++p) {
    const double lo = s_breaks[p], hi = s_breaks[p + 1];
    if (!(hi > lo)) throw Error(Errc::domain, "breakpoints must increase");
    const double m = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    for (auto i : idx) {
      const double s = m + hw * gx[i];
      r.t.push_back(path.at(s));
      r.w.push_back(hw * gw[i] * path.tangent(s));
    }
  }
  return r;
}

}  // namespace fsel
