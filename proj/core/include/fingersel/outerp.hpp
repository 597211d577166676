#pragma once

#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "fingersel/cpath.hpp"
#include "fingersel/helegeom.hpp"

namespace fsel {

enum class OuterMode { LOCAL, FULL_STUB };
enum class ContourKind { real_axis, rl_joined };

struct OuterConfig {
  ContourKind contour = ContourKind::real_axis;
  double r_far = 1e4;    // far end of the contour
  double nu_tip = 0.05;  // excluded tip ball
  int nodes = 2000;
  double grade_kappa = 1.0;  // tanh grading strength toward the tip
  // r_l data for the rl_joined contour
  double b = 0.5, alpha0 = std::numbers::pi / 6;
  // r2 (rays at theta and pi - theta) for the p = 0 nonlocal correction
  double phi0 = std::numbers::pi / 12, mu = std::numbers::pi / 6;
  double r2_inner = 1e-7, r2_outer = 1e4;
  double r2_tail_decay = 2.0;
  int max_iter = 40;
  double stop_tol = 1e-8;
  // take F_-' from the current iterate's reflection instead of freezing it at p = 0
  bool reflect_current = false;
  double quad_tol = 1e-13;
};

// Real-axis contour from -r_far to -nu_tip with log-tanh grading and the P values at nodes.
struct OuterContour {
  ContourKind kind = ContourKind::real_axis;
  ComplexPath path;
  std::vector<double> u;   // log(-xi)
  std::vector<cplx> xi;
  std::vector<cplx> P;     // P at the nodes (base point -1)
};

OuterContour build_contour(const Params& prm, const OuterConfig& cfg);

// Fields of the p = 0 problem on the contour.
struct OuterFields {
  std::vector<cplx> Q, Qp, V0, V0p, Qt, H, Hb, sV0;  // sV0 = sqrt(V0^2 - 4) = -2 i xi / s
  std::vector<cplx> Itilde;                          // p = 0 nonlocal correction
  cplx Itilde0;                                      // ... at the tip
  cplx Qp0;                                          // Q'(0) from below
  cplx g0;                                           // integrand of the correction at 0
};

OuterFields build_fields(const Params& prm, const OuterContour& c, const OuterConfig& cfg);

// p = 0 nonlocal correction at an arbitrary point off r2 (used for diagnostics and tests).
struct ItildeRule {
  NodeRule rule;
  std::vector<cplx> g;
  cplx g0;
  double theta = 0.0;
  std::vector<std::pair<Piece, cplx>> far_ends;  // ray pieces with g at the truncated end
  cplx operator()(cplx xi) const;
};
ItildeRule build_itilde(const Params& prm, const OuterConfig& cfg);
// integrand g(t) of the correction, -1/(2 pi) int g(t)/(t - xi) dt over r2
cplx itilde_integrand(cplx t, const Params& prm, double tol = 1e-13);

// Quadratic remainder; sqrt((V0+p)^2-4) on the sheet continuous from p = 0.
cplx eval_G8(cplx p, cplx xi, const Params& prm);
// Variant with an explicit branch for sqrt((V0+p)^2-4) (contour tracking).
cplx eval_G8_branch(cplx p, cplx V0, cplx sV0, cplx sA, cplx Hb);

// G6 and G7 at a point; branches of sqrt(w^2-4) chosen continuous from V0 (p = 0, Itilde = 0).
std::pair<cplx, cplx> eval_G6_G7(cplx p, cplx xi, const Params& prm, cplx Itilde, cplx Fminus_prime);

// nearest-sheet square root relative to a reference value
cplx sqrt_near(cplx z, cplx ref);

// p = U(N): (1/eps^2) g1(xi) int_{-inf}^{xi} g2(t) N(t) dt by exponential product integration.
std::vector<cplx> apply_U(const std::vector<cplx>& N, const OuterContour& c, const Params& prm);

struct IterRecord {
  int index = 0;
  double diff = 0.0;
  cplx beta;
};

struct OuterSolution {
  OuterMode mode = OuterMode::LOCAL;
  OuterContour contour;
  std::vector<cplx> seed;  // iterate 0
  std::vector<cplx> p;
  std::vector<cplx> dp;  // p' from a 5-point finite difference in log(-xi)
  cplx beta;
  cplx beta0;
  std::vector<IterRecord> iterations;
  double residual_sup = 0.0;  // relative to max |eps^2 (Q' - V0')|
  bool converged = false;
  double max_G6 = 0.0, max_G7 = 0.0, max_G8 = 0.0;
  cplx Itilde0;
  std::vector<std::string> notes;
};

cplx eval_beta(const OuterSolution& sol, const OuterFields& f, const Params& prm, cplx dp0);

OuterSolution picard_solve(const Params& prm, const OuterConfig& cfg = {}, OuterMode mode = OuterMode::LOCAL);

// Pointwise residual of eps^2 p' + Qtilde p - N(p) at the contour nodes.
std::vector<double> outer_residual(const OuterSolution& sol, const Params& prm, const OuterConfig& cfg);

// sup over the grid of |Re F + eps^2 Im(F'+H)/|F'+H||, F = eps^2 (p - Q + V0).
double bc_residual(const OuterSolution& sol, const Params& prm, const std::vector<double>& xi_grid);
// Same residual for explicit F, F' fields on the real axis.
double bc_residual_fields(const Field& F, const Field& Fp, double eps, double gamma, const std::vector<double>& xi_grid);
std::vector<double> default_bc_grid(int n_per_side = 200);

}  // namespace fsel
