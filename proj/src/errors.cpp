#include "solitonlab/errors.hpp"

namespace solitonlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::NegativeSolution: return "NegativeSolution";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::TailTooShort: return "TailTooShort";
    case ErrorKind::GapEmpty: return "GapEmpty";
    case ErrorKind::EmbeddedMode: return "EmbeddedMode";
    case ErrorKind::DegeneratePairing: return "DegeneratePairing";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::SolveFailed: return "SolveFailed";
    case ErrorKind::SpectralPointOnDiscrete: return "SpectralPointOnDiscrete";
    case ErrorKind::ExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::BranchExhausted: return "BranchExhausted";
    case ErrorKind::IllConditionedRegression: return "IllConditionedRegression";
    case ErrorKind::SmallDenominator: return "SmallDenominator";
    case ErrorKind::NotDecaying: return "NotDecaying";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::NoOscillation: return "NoOscillation";
  }
  return "UnknownError";
}

}  // namespace solitonlab
