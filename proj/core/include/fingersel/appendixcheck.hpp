#pragma once

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fingersel/cpath.hpp"

namespace fsel {

enum class Lemma { L6_1, L6_2, L6_3, C6_4, L6_5, L6_6, C6_7, L6_8, L6_9 };
std::string_view lemma_name(Lemma id);
const std::vector<Lemma>& all_lemmas();

// Free parameters of every contour family. The defaults are artifact choices.
struct ContourParams {
  // L6.1: real segment [a1, b1]
  double a1 = -10.0, b1 = -0.1;
  // L6.2: imaginary segment from -i b to -i b_stop
  double b = 0.5, b_stop = 0.01;
  // L6.3: ray xi0 - s e^{i phi}, s in [0, ray_len]
  cplx xi0 = -20.0;
  double phi = 0.0, ray_len = 200.0;
  // r_u geometry shared by C6.4, L6.6, C6.7
  double R = 20.0, nu1 = 0.2, phi0 = std::numbers::pi / 12;
  double u1_len = 200.0;
  // L6.5: arc of radius arc_R from just above pi/2 down into R^- (depth b)
  double arc_R = 20.0;
  // L6.6: direction angle
  double phi6 = 0.0;
  // L6.8: offset of the two tip segments
  double nu8 = 0.05;
  // L6.9: ray -i b9 + s e^{i(pi + alpha0)}
  double b9 = 0.5, alpha0 = std::numbers::pi / 6, len9 = 30.0;
};

struct CheckReport {
  Lemma lemma_id = Lemma::L6_1;
  double gamma = 0.0;
  ComplexPath contour;
  double min_margin = 0.0;  // smallest signed, weighted dRe P/ds (positive = claim holds)
  bool direction_ok = false;
  int samples = 0;
  double fitted_C1 = 0.0;  // for the weighted-bound lemmas: min |dRe P/ds| |t - 2i|^2
  double fitted_C2 = 0.0;  // max |dRe P/ds| |t - 2i|^2
  std::string claim;
  int first_violation = -1;  // sample index of the first wrong sign
  // near-tip model comparison (L6.8 only)
  bool near_tip_checked = false;
  int near_tip_window_samples = 0;  // samples with |t| < nu/4
  double near_tip_deviation = 0.0;  // max |actual - model| / max |model| over the segments
  bool near_tip_ok = false;
};

// d Re P(t(s))/ds = Re(Qtilde(t) t'(s))
double dReP_ds(cplx t, cplx dt, double gamma);

CheckReport check(Lemma id, double gamma, const ContourParams& params = {}, int samples = 400);

struct AdmissibleResult {
  ContourParams params;
  std::vector<std::string> scanned;  // description of every candidate in scan order
};

// Deterministic grid search over the lemma's existential parameters; throws NOT_FOUND.
AdmissibleResult find_admissible(Lemma id, double gamma, const ContourParams& base = {}, int samples = 400);
// Same, over an explicit list of candidates.
AdmissibleResult find_admissible(Lemma id, double gamma, const std::vector<ContourParams>& grid, int samples = 400);

}  // namespace fsel
