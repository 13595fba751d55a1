#pragma once

#include <stdexcept>
#include <string>

namespace lattdse {

enum class Errc {
  invalid_argument,
  non_divisible_moduli,
  non_coprime_component,
  rank_deficient,
  point_count_mismatch,
  overflow_risk,
  radius_exhausted,
  spec_mismatch,
  non_normalizable,
  config_error,
  reference_too_coarse,
  numerical_invariant,
  io_error,
};

/// Library error carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace lattdse
