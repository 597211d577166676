#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace fsel {

using cplx = std::complex<double>;

enum class PieceKind { ray, segment, arc };

// One oriented piece of a contour, parameterized by arclength s in [0, length()].
struct Piece {
  PieceKind kind = PieceKind::segment;
  cplx a;  // start point
  cplx b;  // end point
  // arc data
  cplx center;
  double radius = 0.0;
  double theta0 = 0.0;
  double dtheta = 0.0;
  // ray data: a ray is stored truncated; `inbound` means it is traversed from the
  // truncated far end toward its finite anchor.
  bool inbound = false;
  double tail_decay = 0.0;  // integrand ~ |t|^-tail_decay past the truncation; 0 = no tail

  double length() const;
  cplx at(double s) const;
  cplx tangent(double s) const;  // unit dt/ds
  cplx far_end() const { return inbound ? a : b; }
  cplx far_direction() const;    // outward unit direction at the truncated end
};

class ComplexPath {
 public:
  ComplexPath() = default;

  static ComplexPath segment(cplx a, cplx b);
  // Outgoing ray anchor + rho*e^{i angle}, rho in [0, truncation].
  static ComplexPath ray(cplx anchor, double angle, double truncation, double tail_decay = 0.0);
  // Incoming ray from anchor + truncation*e^{i angle} down to anchor.
  static ComplexPath ray_in(cplx anchor, double angle, double truncation, double tail_decay = 0.0);
  static ComplexPath arc(cplx center, double radius, double theta0, double theta1);

  ComplexPath& line_to(cplx b);
  ComplexPath& arc_to(cplx center, double theta1);
  ComplexPath& ray_out(double angle, double truncation, double tail_decay = 0.0);
  ComplexPath& append(const ComplexPath& other);

  ComplexPath reversed() const;

  const std::vector<Piece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  // cumulative arclength at the start of each piece, plus the total at the end
  const std::vector<double>& breakpoints() const { return cum_; }
  cplx start() const;
  cplx end() const;
  cplx at(double s) const;
  cplx tangent(double s) const;

 private:
  void push(Piece p);
  std::size_t piece_index(double s) const;

  std::vector<Piece> pieces_;
  std::vector<double> cum_;
};

struct TraceSample {
  double s;
  cplx t;
  cplx value;
  cplx derivative;  // dy/dt at the sample
  double residual;  // integral-form defect of the step that produced the sample
};

struct Trace {
  std::vector<TraceSample> samples;
  double tol = 0.0;
  int rejected = 0;

  double max_residual() const;
  const TraceSample& back() const { return samples.back(); }
  // value at the first sample whose position is within `eps` of `t`
  const TraceSample* find(cplx t, double eps = 1e-12) const;
};

using OdeRhs = std::function<cplx(cplx t, cplx y)>;

struct OdeOptions {
  double h_init = 1e-2;
  long max_steps = 2000000;
};

// Dormand-Prince 5(4) with PI step control; dy/dt = rhs(t, y) integrated along the path.
Trace integrate_ode(const ComplexPath& path, const OdeRhs& rhs, cplx initial, double tol,
                    const OdeOptions& opt = {});

// Fixed-step classical RK4 along the path (verification oracle).
cplx integrate_ode_rk4(const ComplexPath& path, const OdeRhs& rhs, cplx initial, double h);

using Integrand = std::function<cplx(cplx t)>;

struct QuadResult {
  cplx value;
  double error = 0.0;
  int panels = 0;
};

struct QuadOptions {
  int max_panels = 20000;
};

// Globally adaptive Gauss-Kronrod (7/15) along the path, summed with compensation.
// Truncated rays with a declared decay add the algebraic tail estimate.
QuadResult integrate_quadrature_ex(const ComplexPath& path, const Integrand& f, double tol,
                                   const QuadOptions& opt = {});
cplx integrate_quadrature(const ComplexPath& path, const Integrand& f, double tol);

// Tail beyond the truncated end of a ray assuming f ~ |t|^-k there.
cplx ray_tail_estimate(const Piece& ray, const Integrand& f);

// Fixed composite Gauss-Legendre rule on a path: panels between consecutive
// arclength breakpoints (which must be increasing and lie in [0, length]).
struct NodeRule {
  std::vector<cplx> t;
  std::vector<cplx> w;  // includes dt/ds
};
NodeRule composite_gauss(const ComplexPath& path, const std::vector<double>& s_breaks, int order);

// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(cplx v);
  cplx value() const { return {sr_ + cr_, si_ + ci_}; }

 private:
  double sr_ = 0, cr_ = 0, si_ = 0, ci_ = 0;
};

}  // namespace fsel
