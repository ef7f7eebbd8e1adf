#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poseloop {

enum class Errc {
  kInvalidArgument,
  kInvalidIntrinsics,
  kNonPositiveDepth,
  kInvalidDepth,
  kDimensionMismatch,
  kInsufficientPixels,
  kDegeneratePred,
  kNoValidPoints,
  kTooFewPoints,
  kDiverged,
  kNoConsensus,
  kEvenWindow,
  kTooShort,
  kTooFewFrames,
  kJudgeUnavailable,
  kEmptyGroup,
  kConstantInput,
  kLengthMismatch,
  kParse,
  kIo,
  kConfig,
};

std::string_view errc_name(Errc code);

// All library failures are reported through this type. `index` carries the
// frame, attempt or record number when the failure is tied to one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> index = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

}  // namespace poseloop
