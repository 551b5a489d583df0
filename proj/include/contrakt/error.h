#pragma once

#include <stdexcept>
#include <string>

namespace contrakt {

enum class ErrorKind {
  kNonConvergence,
  kRankDeficient,
  kDimensionMismatch,
  kInvalidInput,
  kInvalidGraph,
  kNotReachable,
  kDisconnected,
  kNotConnected,
  kEpsilonTooSmall,
  kUnsupportedP,
  kAllZeroWeights,
  kKernelNotInvariant,
  kNotInvariant,
  kPositiveSpectrum,
  kBadRepresentation,
  kNonConvexCost,
  kNotMetzler,
  kNotHurwitz,
  kUnknownName,
  kSingularQ,
  kDiverged,
  kStepUnderflow,
  kInsufficientDecay,
  kNonPositiveState,
};

const char* to_string(ErrorKind kind);

// Every failure the library signals is an Error carrying one of the kinds
// above; what() is prefixed with the kind name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace contrakt
