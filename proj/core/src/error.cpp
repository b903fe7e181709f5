#include "tactile/error.hpp"

namespace tactile {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kZeroRate: return "ZeroRate";
    case Errc::kZeroChannels: return "ZeroChannels";
    case Errc::kUnknownKind: return "UnknownKind";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kTruncatedChunk: return "TruncatedChunk";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kIoError: return "IoError";
    case Errc::kParseError: return "ParseError";
    case Errc::kOverlappingEvents: return "OverlappingEvents";
    case Errc::kNotAContainer: return "NotAContainer";
    case Errc::kContactOutsideSurface: return "ContactOutsideSurface";
    case Errc::kNyquistViolation: return "NyquistViolation";
    case Errc::kTooShort: return "TooShort";
    case Errc::kMissingModality: return "MissingModality";
    case Errc::kInsufficientData: return "InsufficientData";
    case Errc::kNoOnset: return "NoOnset";
    case Errc::kNonDecaying: return "NonDecaying";
    case Errc::kBudgetTooSmall: return "BudgetTooSmall";
    case Errc::kEmptyMask: return "EmptyMask";
    case Errc::kZeroMean: return "ZeroMean";
    case Errc::kOverlappingRois: return "OverlappingRois";
    case Errc::kZeroNoise: return "ZeroNoise";
    case Errc::kNoPeaksFound: return "NoPeaksFound";
    case Errc::kEmptyDataset: return "EmptyDataset";
    case Errc::kLabelOutOfRange: return "LabelOutOfRange";
    case Errc::kShapeUnderflow: return "ShapeUnderflow";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kModalityMismatch: return "ModalityMismatch";
    case Errc::kNoTapsFound: return "NoTapsFound";
    case Errc::kConfigError: return "ConfigError";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace tactile
