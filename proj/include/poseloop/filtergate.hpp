#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poseloop {

// 8-bit raster, row-major, channels interleaved (1 = gray, 3 = RGB, 4 = RGBA).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  static Image filled(int width, int height, int channels, std::uint8_t value);
};

struct FrameSummary {
  std::string video_id;
  int frame_count = 0;
  std::vector<int> frame_indices;
  Image stacked;  // sampled frames top to bottom, unscaled
};

// k evenly spaced indices: round(i * (N - 1) / (k - 1)). Throws kTooFewFrames.
std::vector<int> sample_frames(int frame_count, int k = 4);

// Throws kTooFewFrames, kInvalidArgument (mismatched frame shapes).
FrameSummary build_summary(std::string video_id, std::span<const Image> frames, int k = 4);

struct GeneratedVideo {
  std::string id;
  std::vector<Image> frames;
  std::optional<bool> human_label;
};

class VideoSource {
 public:
  virtual ~VideoSource() = default;
  // attempt is 1-based.
  virtual GeneratedVideo generate(std::string_view command, int attempt) = 0;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string id() const = 0;
  // Throws kJudgeUnavailable.
  virtual bool judge(const FrameSummary& summary, std::string_view command) = 0;
};

// Looks the video id up in `labels`; otherwise passes iff the id contains one
// of `accept_keywords`. With neither match, reports the judge as unavailable
// when `strict` is set and fails the video otherwise.
class MockJudge : public Judge {
 public:
  MockJudge(std::string id, std::map<std::string, bool> labels,
            std::vector<std::string> accept_keywords = {}, bool strict = false);

  std::string id() const override { return id_; }
  bool judge(const FrameSummary& summary, std::string_view command) override;
  int calls() const { return calls_; }

 private:
  std::string id_;
  std::map<std::string, bool> labels_;
  std::vector<std::string> accept_keywords_;
  bool strict_;
  int calls_ = 0;
};

/// HTTP client for an external judge.
///
/// POST <path> with a JSON body {"command": str, "image_png_base64": str}
/// holding the stacked summary as PNG. The response body is the single token
/// "Yes" or "No" (case-insensitive, surrounding whitespace and a trailing
/// period ignored). Anything else, or a transport failure, is reported as
/// kJudgeUnavailable.
class RemoteJudge : public Judge {
 public:
  RemoteJudge(std::string judge_id, std::string host, int port, std::string path = "/judge",
              int timeout_s = 60);

  std::string id() const override { return judge_id_; }
  bool judge(const FrameSummary& summary, std::string_view command) override;

 private:
  std::string judge_id_;
  std::string host_;
  int port_;
  std::string path_;
  int timeout_s_;
};

// Parses a judge reply token. Returns nullopt when it is neither Yes nor No.
std::optional<bool> parse_judge_reply(std::string_view body);

std::vector<std::uint8_t> encode_png(const Image& image);
std::string base64_encode(std::span<const std::uint8_t> bytes);

struct Verdict {
  std::string video;
  int attempt = 1;
  bool pass = false;
  std::string judge;
  std::optional<bool> human;
};

struct FilterOutcome {
  int selected_attempt = 0;
  std::string selected_video;
  bool passed_filter = false;
  bool fallback_used = false;
};

struct FilterRun {
  FilterOutcome outcome;
  std::vector<Verdict> verdicts;
};

// Generate, summarize, judge; stop at the first pass. When every attempt
// fails the last one is kept with fallback_used set. Judge failures are
// rethrown with the attempt number as index.
FilterRun run_filter(VideoSource& generator, Judge& judge, std::string_view command,
                     int max_attempts = 5, int frames_per_summary = 4);

struct PassRate {
  std::string group;
  std::size_t passes = 0;
  std::size_t total = 0;
  double rate = 0.0;

  std::string rational() const { return std::to_string(passes) + "/" + std::to_string(total); }
};

using GroupKey = std::function<std::string(const Verdict&)>;

// Key: the video id up to (not including) its `levels`-th '/'.
GroupKey group_by_video_prefix(int levels);

// First-attempt pass fraction per group, sorted by group name.
// Throws kEmptyGroup when there are no first-attempt verdicts.
std::vector<PassRate> pass_rate(std::span<const Verdict> verdicts, const GroupKey& key);
// Same, restricted to `groups` in the given order; kEmptyGroup if any has no verdicts.
std::vector<PassRate> pass_rate(std::span<const Verdict> verdicts, const GroupKey& key,
                                std::span<const std::string> groups);

// Sample Pearson correlation. Throws kLengthMismatch, kConstantInput,
// kTooShort (fewer than 2 samples).
double pearson(std::span<const double> x, std::span<const double> y);

// Correlation between judge verdicts and human labels over labeled verdicts.
double judge_human_correlation(std::span<const Verdict> verdicts);

}  // namespace poseloop
