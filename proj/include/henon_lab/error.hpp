#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace henon_lab {

enum class ErrorKind {
  degenerate_parameter,
  no_real_fixed_points,
  complex_eigenvalues,
  resonance_obstruction,
  blow_up,
  not_a_graph,
  out_of_domain,
  newton_diverged,
  order_ambiguous,
  order_too_high,
  degenerate_unfolding,
  unclassifiable,
  step_underflow,
  indeterminate,
  continuation_stalled,
  no_sign_change,
  seed_out_of_neighborhood,
  window_escape,
  orbit_escaped,
  invalid_input,
  invalid_config,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_parameter: return "DegenerateParameter";
    case ErrorKind::no_real_fixed_points: return "NoRealFixedPoints";
    case ErrorKind::complex_eigenvalues: return "ComplexEigenvalues";
    case ErrorKind::resonance_obstruction: return "ResonanceObstruction";
    case ErrorKind::blow_up: return "BlowUp";
    case ErrorKind::not_a_graph: return "NotAGraph";
    case ErrorKind::out_of_domain: return "OutOfDomain";
    case ErrorKind::newton_diverged: return "NewtonDiverged";
    case ErrorKind::order_ambiguous: return "OrderAmbiguous";
    case ErrorKind::order_too_high: return "OrderTooHigh";
    case ErrorKind::degenerate_unfolding: return "DegenerateUnfolding";
    case ErrorKind::unclassifiable: return "Unclassifiable";
    case ErrorKind::step_underflow: return "StepUnderflow";
    case ErrorKind::indeterminate: return "Indeterminate";
    case ErrorKind::continuation_stalled: return "ContinuationStalled";
    case ErrorKind::no_sign_change: return "NoSignChange";
    case ErrorKind::seed_out_of_neighborhood: return "SeedOutOfNeighborhood";
    case ErrorKind::window_escape: return "WindowEscape";
    case ErrorKind::orbit_escaped: return "OrbitEscaped";
    case ErrorKind::invalid_input: return "InvalidInput";
    case ErrorKind::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace henon_lab
