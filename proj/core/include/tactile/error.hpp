#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tactile {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto process exit codes.
enum class Errc {
  kZeroRate,
  kZeroChannels,
  kUnknownKind,
  kBadMagic,
  kVersionMismatch,
  kTruncatedChunk,
  kShapeMismatch,
  kIoError,
  kParseError,
  kOverlappingEvents,
  kNotAContainer,
  kContactOutsideSurface,
  kNyquistViolation,
  kTooShort,
  kMissingModality,
  kInsufficientData,
  kNoOnset,
  kNonDecaying,
  kBudgetTooSmall,
  kEmptyMask,
  kZeroMean,
  kOverlappingRois,
  kZeroNoise,
  kNoPeaksFound,
  kEmptyDataset,
  kLabelOutOfRange,
  kShapeUnderflow,
  kTooFewSamples,
  kModalityMismatch,
  kNoTapsFound,
  kConfigError,
  kInvalidArgument,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tactile
