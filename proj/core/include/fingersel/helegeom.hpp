#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "fingersel/cpath.hpp"

namespace fsel {

struct Params {
  double lambda = 0.5;
  double c = 0.0;
  double gamma = 1.0;
  double eps = 0.0;
  double alpha = 0.0;
};

Params params_from(double lambda, double c);
// Bundle for a given gamma and eps directly (c and lambda are derived).
Params params_from_gamma_eps(double gamma, double eps);
double lambda_from_alpha(double alpha, double eps);

enum class Fn { H, Hbar, Qtilde, V0, sqrtV0sq_minus4, P, g1, g2, Q, z0, z };
std::string_view fn_name(Fn f);

// (xi - i gamma)^{1/2}, cut vertically up from +i gamma, arg in (-3pi/2, pi/2]
cplx sqrt_minus(cplx xi, double gamma);
// (xi + i gamma)^{1/2}, cut vertically down from -i gamma, arg in [-pi/2, 3pi/2)
cplx sqrt_plus(cplx xi, double gamma);
// sqrt(xi^2 + gamma^2) as the product of the two; positive on the real axis
cplx sroot(cplx xi, double gamma);

cplx eval_H(cplx xi, double gamma);
cplx eval_Hbar(cplx xi, double gamma);
cplx eval_Qtilde(cplx xi, double gamma);
cplx eval_V0(cplx xi, double gamma);
cplx eval_V0prime(cplx xi, double gamma);
cplx eval_sqrtV0sq_minus4(cplx xi, double gamma);

// Closed-form objects only need gamma; P/g/Q use default paths and tolerances; z uses F = 0.
cplx eval(Fn fn, cplx xi, const Params& p);

constexpr double kPBase = -1.0;
constexpr double kDefaultTau = 6.0 / 7.0;

// Default integration path from the base point -1 to xi: straight unless that
// passes a pole or crosses a cut, in which case it detours through the upper half plane.
ComplexPath default_P_path(cplx xi, double gamma);
cplx eval_P(cplx xi, const ComplexPath& path, double gamma, double tol = 1e-13);
cplx eval_P(cplx xi, double gamma, double tol = 1e-13);

enum class GKind { g1, g2 };
cplx eval_g(cplx xi, double eps, GKind which, double gamma);

// exp((P(t) - P(xi))/eps^2), the descent kernel; the P difference is one path integral from xi to t.
cplx weight_ratio(cplx xi, cplx t, double eps, double gamma, const ComplexPath* path = nullptr,
                  double tol = 1e-13);
// Same kernel from an already known P difference.
cplx weight_ratio_from_dP(cplx dP, double eps, double tol = 1e-12);

// I(xi) = int_R dt / ((t - xi) sqrt(t^2 + gamma^2)) by quadrature with singularity
// subtraction and algebraic tail completion; valid for Im xi != 0.
cplx cauchy_I(cplx xi, double gamma, double tol = 1e-13);
cplx cauchy_Iprime(cplx xi, double gamma, double tol = 1e-13);
// Boundary values from below on the real axis, I(x - i0) and I'(x - i0).
cplx cauchy_I_below(double x, double gamma, double tol = 1e-13);
cplx cauchy_Iprime_below(double x, double gamma, double tol = 1e-13);

// Q(xi) = -(i gamma/pi) I(xi) for Im xi < 0 and its derivative.
cplx eval_Q(cplx xi, double gamma, double tol = 1e-12);
cplx eval_Qprime(cplx xi, double gamma, double tol = 1e-12);

cplx map_z0(cplx xi, double lambda);
using Field = std::function<cplx(cplx)>;
cplx map_z(cplx xi, double lambda, const Field& F);

struct ShapePoint {
  double xi;
  cplx z;
};
std::vector<ShapePoint> shape_sample(double lambda, const Field& F, int n);

struct UnivalenceReport {
  bool injective = true;
  bool monotone = true;
  int first = -1;
  int second = -1;
  bool ok() const { return injective && monotone; }
};
UnivalenceReport univalence_check(const std::vector<ShapePoint>& poly);

}  // namespace fsel
