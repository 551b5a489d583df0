#include "contrakt/error.h"

namespace contrakt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kInvalidGraph: return "InvalidGraph";
    case ErrorKind::kNotReachable: return "NotReachable";
    case ErrorKind::kDisconnected: return "Disconnected";
    case ErrorKind::kNotConnected: return "NotConnected";
    case ErrorKind::kEpsilonTooSmall: return "EpsilonTooSmall";
    case ErrorKind::kUnsupportedP: return "UnsupportedP";
    case ErrorKind::kAllZeroWeights: return "AllZeroWeights";
    case ErrorKind::kKernelNotInvariant: return "KernelNotInvariant";
    case ErrorKind::kNotInvariant: return "NotInvariant";
    case ErrorKind::kPositiveSpectrum: return "PositiveSpectrum";
    case ErrorKind::kBadRepresentation: return "BadRepresentation";
    case ErrorKind::kNonConvexCost: return "NonConvexCost";
    case ErrorKind::kNotMetzler: return "NotMetzler";
    case ErrorKind::kNotHurwitz: return "NotHurwitz";
    case ErrorKind::kUnknownName: return "UnknownName";
    case ErrorKind::kSingularQ: return "SingularQ";
    case ErrorKind::kDiverged: return "Diverged";
    case ErrorKind::kStepUnderflow: return "StepUnderflow";
    case ErrorKind::kInsufficientDecay: return "InsufficientDecay";
    case ErrorKind::kNonPositiveState: return "NonPositiveState";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace contrakt
