#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ttesim {

enum class Errc {
  NonMonotoneAbscissa,
  TooFewKnots,
  StepUnderflow,
  DegenerateBounds,
  FitDiverged,
  InsufficientSamples,
  EmptySamples,
  CapacityExhausted,
  NegativeEffectiveVoltage,
  InvalidParameters,
  InvalidMix,
  NonPositiveDwell,
  AllRunsCensored,
  SchemaError,
  NonMonotoneTime,
  NoQuasiStaticSegment,
  NoStepFound,
  NoRestSegment,
  DegenerateVariance,
  NoOverlap,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ttesim
