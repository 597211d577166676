#include "fingersel/errors.hpp"

namespace fsel {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::domain: return "DOMAIN";
    case Errc::pole: return "POLE";
    case Errc::cut: return "CUT";
    case Errc::overflow: return "OVERFLOW";
    case Errc::step_underflow: return "STEP_UNDERFLOW";
    case Errc::nonfinite: return "NONFINITE";
    case Errc::no_convergence: return "NO_CONVERGENCE";
    case Errc::not_descent: return "NOT_DESCENT";
    case Errc::near_singular: return "NEAR_SINGULAR";
    case Errc::divergence: return "DIVERGENCE";
    case Errc::continuation_fail: return "CONTINUATION_FAIL";
    case Errc::family_mismatch: return "FAMILY_MISMATCH";
    case Errc::not_found: return "NOT_FOUND";
    case Errc::window_noise: return "WINDOW_NOISE";
    case Errc::degenerate: return "DEGENERATE";
    case Errc::regime: return "REGIME";
    case Errc::noninjective: return "NONINJECTIVE";
    case Errc::not_implemented: return "NOT_IMPLEMENTED";
  }
  return "UNKNOWN";
}

}  // namespace fsel
