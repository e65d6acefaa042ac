#include "mtlab/error.hpp"

namespace mtlab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CoincidentPoints: return "COINCIDENT_POINTS";
    case ErrorCode::OutsideDomain: return "OUTSIDE_DOMAIN";
    case ErrorCode::TooCloseToBoundary: return "TOO_CLOSE_TO_BOUNDARY";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::NonpositiveRadius: return "NONPOSITIVE_RADIUS";
    case ErrorCode::NonintegrableForcing: return "NONINTEGRABLE_FORCING";
    case ErrorCode::GridTooShort: return "GRID_TOO_SHORT";
    case ErrorCode::NoBracket: return "NO_BRACKET";
    case ErrorCode::Stiffness: return "STIFFNESS";
    case ErrorCode::Range: return "RANGE";
    case ErrorCode::DiscretizationUnresolved: return "DISCRETIZATION_UNRESOLVED";
    case ErrorCode::NewtonDiverged: return "NEWTON_DIVERGED";
    case ErrorCode::MeshUnderresolved: return "MESH_UNDERRESOLVED";
    case ErrorCode::NegativeSolution: return "NEGATIVE_SOLUTION";
    case ErrorCode::EigensolveFail: return "EIGENSOLVE_FAIL";
    case ErrorCode::SampleTooClose: return "SAMPLE_TOO_CLOSE";
    case ErrorCode::BallNotContained: return "BALL_NOT_CONTAINED";
    case ErrorCode::NotHarmonic: return "NOT_HARMONIC";
    case ErrorCode::CollidingPoints: return "COLLIDING_POINTS";
    case ErrorCode::InsufficientPoints: return "INSUFFICIENT_POINTS";
    case ErrorCode::SignalBelowNoise: return "SIGNAL_BELOW_NOISE";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace mtlab
