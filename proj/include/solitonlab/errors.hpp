#pragma once

#include <stdexcept>
#include <string>

namespace solitonlab {

enum class ErrorKind {
  NewtonDiverged,
  NegativeSolution,
  SingularSystem,
  TailTooShort,
  GapEmpty,
  EmbeddedMode,
  DegeneratePairing,
  IllConditioned,
  SolveFailed,
  SpectralPointOnDiscrete,
  ExtrapolationUnstable,
  BlowupDetected,
  NonFiniteState,
  WindowTooShort,
  ZeroMass,
  BranchExhausted,
  IllConditionedRegression,
  SmallDenominator,
  NotDecaying,
  NonConvergent,
  NoOscillation
};

const char* to_string(ErrorKind kind);

// Numerical failures; the CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad configuration or unsupported combination; exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& detail) : std::runtime_error("ConfigInvalid: " + detail) {}
};

class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::string& file)
      : std::runtime_error("MissingArtifact: " + file), file_(file) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

}  // namespace solitonlab
