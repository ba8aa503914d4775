#pragma once

#include <stdexcept>
#include <string>

namespace fracwkb {

/// Base of every error raised by the library. Each module throws the most
/// specific subclass so callers (and the CLI) can report a structured reason.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define FRACWKB_DEFINE_ERROR(Name, tag)                  \
  class Name : public Error {                            \
   public:                                               \
    using Error::Error;                                  \
    const char* kind() const noexcept override { return tag; } \
  };

FRACWKB_DEFINE_ERROR(InvalidArgument, "invalid-argument")
FRACWKB_DEFINE_ERROR(EllipticityViolation, "ellipticity-violation")
FRACWKB_DEFINE_ERROR(GuardBandError, "guard-band")
FRACWKB_DEFINE_ERROR(CausticError, "caustic")
FRACWKB_DEFINE_ERROR(ResolutionError, "resolution")
FRACWKB_DEFINE_ERROR(InsufficientData, "insufficient-data")
FRACWKB_DEFINE_ERROR(SpectralGapError, "spectral-gap")
FRACWKB_DEFINE_ERROR(AssemblyError, "assembly")
FRACWKB_DEFINE_ERROR(ContractionFailure, "contraction-failure")
FRACWKB_DEFINE_ERROR(ConfigError, "config")

#undef FRACWKB_DEFINE_ERROR

/// Non-finite values or runaway sup-norm growth during a nonlinear solve.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  const char* kind() const noexcept override { return "blow-up"; }
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace fracwkb
