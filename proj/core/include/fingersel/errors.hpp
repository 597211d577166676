#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsel {

enum class Errc {
  domain,
  pole,
  cut,
  overflow,
  step_underflow,
  nonfinite,
  no_convergence,
  not_descent,
  near_singular,
  divergence,
  continuation_fail,
  family_mismatch,
  not_found,
  window_noise,
  degenerate,
  regime,
  noninjective,
  not_implemented,
};

std::string_view errc_name(Errc c);

// Every numerical failure surfaces as this exception; the code is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fsel
