#include "poseloop/error.hpp"

namespace poseloop {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kInvalidIntrinsics: return "InvalidIntrinsics";
    case Errc::kNonPositiveDepth: return "NonPositiveDepth";
    case Errc::kInvalidDepth: return "InvalidDepth";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kInsufficientPixels: return "InsufficientPixels";
    case Errc::kDegeneratePred: return "DegeneratePred";
    case Errc::kNoValidPoints: return "NoValidPoints";
    case Errc::kTooFewPoints: return "TooFewPoints";
    case Errc::kDiverged: return "Diverged";
    case Errc::kNoConsensus: return "NoConsensus";
    case Errc::kEvenWindow: return "EvenWindow";
    case Errc::kTooShort: return "TooShort";
    case Errc::kTooFewFrames: return "TooFewFrames";
    case Errc::kJudgeUnavailable: return "JudgeUnavailable";
    case Errc::kEmptyGroup: return "EmptyGroup";
    case Errc::kConstantInput: return "ConstantInput";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kParse: return "Parse";
    case Errc::kIo: return "Io";
    case Errc::kConfig: return "Config";
  }
  return "Unknown";
}

namespace {

std::string decorate(Errc code, const std::string& what, std::optional<std::size_t> index) {
  std::string msg(errc_name(code));
  if (index) msg += " [" + std::to_string(*index) + "]";
  msg += ": ";
  msg += what;
  return msg;
}

}  // namespace

Error::Error(Errc code, const std::string& what, std::optional<std::size_t> index)
    : std::runtime_error(decorate(code, what, index)), code_(code), index_(index) {}

}  // namespace poseloop
