#pragma once

#include <stdexcept>
#include <string>

namespace mtlab {

enum class ErrorCode {
  CoincidentPoints,
  OutsideDomain,
  TooCloseToBoundary,
  NoConvergence,
  NonpositiveRadius,
  NonintegrableForcing,
  GridTooShort,
  NoBracket,
  Stiffness,
  Range,
  DiscretizationUnresolved,
  NewtonDiverged,
  MeshUnderresolved,
  NegativeSolution,
  EigensolveFail,
  SampleTooClose,
  BallNotContained,
  NotHarmonic,
  CollidingPoints,
  InsufficientPoints,
  SignalBelowNoise,
  ConfigInvalid,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mtlab
