#include "poseloop/filtergate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <httplib.h>
#include <json.hpp>
#include <zlib.h>

#include "poseloop/error.hpp"

namespace poseloop {

Image Image::filled(int width, int height, int channels, std::uint8_t value) {
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                        static_cast<std::size_t>(channels),
                    value);
  return img;
}

std::vector<int> sample_frames(int frame_count, int k) {
  if (k < 2) throw Error(Errc::kInvalidArgument, "need at least 2 sampled frames");
  if (frame_count < k) {
    throw Error(Errc::kTooFewFrames, "video has " + std::to_string(frame_count) +
                                         " frames, need " + std::to_string(k));
  }
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(k));
  const long long span = frame_count - 1;
  const long long den = k - 1;
  for (long long i = 0; i < k; ++i) {
    // round-half-up of i * span / den in integer arithmetic
    idx.push_back(static_cast<int>((2 * i * span + den) / (2 * den)));
  }
  return idx;
}

FrameSummary build_summary(std::string video_id, std::span<const Image> frames, int k) {
  FrameSummary s;
  s.video_id = std::move(video_id);
  s.frame_count = static_cast<int>(frames.size());
  s.frame_indices = sample_frames(s.frame_count, k);
  const Image& first = frames[0];
  for (const Image& f : frames) {
    if (f.width != first.width || f.channels != first.channels || f.height <= 0 ||
        f.pixels.size() != static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height) *
                               static_cast<std::size_t>(f.channels)) {
      throw Error(Errc::kInvalidArgument, "frames must share width and channel count");
    }
  }
  s.stacked.width = first.width;
  s.stacked.channels = first.channels;
  for (int i : s.frame_indices) {
    const Image& f = frames[static_cast<std::size_t>(i)];
    s.stacked.height += f.height;
    s.stacked.pixels.insert(s.stacked.pixels.end(), f.pixels.begin(), f.pixels.end());
  }
  return s;
}

MockJudge::MockJudge(std::string id, std::map<std::string, bool> labels,
                     std::vector<std::string> accept_keywords, bool strict)
    : id_(std::move(id)),
      labels_(std::move(labels)),
      accept_keywords_(std::move(accept_keywords)),
      strict_(strict) {}

bool MockJudge::judge(const FrameSummary& summary, std::string_view) {
  ++calls_;
  if (auto it = labels_.find(summary.video_id); it != labels_.end()) return it->second;
  for (const auto& kw : accept_keywords_) {
    if (summary.video_id.find(kw) != std::string::npos) return true;
  }
  if (strict_) throw Error(Errc::kJudgeUnavailable, "no label for video " + summary.video_id);
  return false;
}

std::optional<bool> parse_judge_reply(std::string_view body) {
  std::string token;
  for (char c : body) token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  const auto first = token.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  token = token.substr(first, token.find_last_not_of(" \t\r\n") - first + 1);
  if (!token.empty() && token.back() == '.') token.pop_back();
  if (token == "yes") return true;
  if (token == "no") return false;
  return std::nullopt;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type,
               const std::vector<std::uint8_t>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  int color_type = 0;
  switch (image.channels) {
    case 1: color_type = 0; break;
    case 3: color_type = 2; break;
    case 4: color_type = 6; break;
    default: throw Error(Errc::kInvalidArgument, "PNG needs 1, 3 or 4 channels");
  }
  const std::size_t row = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.channels);
  std::vector<std::uint8_t> raw;
  raw.reserve((row + 1) * static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);  // filter: none
    const auto* src = image.pixels.data() + static_cast<std::size_t>(y) * row;
    raw.insert(raw.end(), src, src + row);
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(Errc::kIo, "zlib compression failed");
  }
  z.resize(zlen);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr.insert(ihdr.end(), {8, static_cast<std::uint8_t>(color_type), 0, 0, 0});
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

RemoteJudge::RemoteJudge(std::string judge_id, std::string host, int port, std::string path,
                         int timeout_s)
    : judge_id_(std::move(judge_id)),
      host_(std::move(host)),
      port_(port),
      path_(std::move(path)),
      timeout_s_(timeout_s) {}

bool RemoteJudge::judge(const FrameSummary& summary, std::string_view command) {
  const auto png = encode_png(summary.stacked);
  const nlohmann::json body = {{"command", std::string(command)},
                               {"image_png_base64", base64_encode(png)}};
  httplib::Client client(host_, port_);
  client.set_connection_timeout(timeout_s_);
  client.set_read_timeout(timeout_s_);
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw Error(Errc::kJudgeUnavailable, "request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(Errc::kJudgeUnavailable, "judge returned HTTP " + std::to_string(res->status));
  }
  const auto verdict = parse_judge_reply(res->body);
  if (!verdict) throw Error(Errc::kJudgeUnavailable, "unparseable judge reply '" + res->body + "'");
  return *verdict;
}

FilterRun run_filter(VideoSource& generator, Judge& judge, std::string_view command,
                     int max_attempts, int frames_per_summary) {
  if (max_attempts < 1) throw Error(Errc::kInvalidArgument, "max_attempts must be >= 1");
  FilterRun run;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    GeneratedVideo video = generator.generate(command, attempt);
    const FrameSummary summary = build_summary(video.id, video.frames, frames_per_summary);
    bool pass = false;
    try {
      pass = judge.judge(summary, command);
    } catch (const Error& e) {
      if (e.code() != Errc::kJudgeUnavailable) throw;
      throw Error(Errc::kJudgeUnavailable, e.what(), static_cast<std::size_t>(attempt));
    }
    run.verdicts.push_back({video.id, attempt, pass, judge.id(), video.human_label});
    run.outcome.selected_attempt = attempt;
    run.outcome.selected_video = video.id;
    if (pass) {
      run.outcome.passed_filter = true;
      return run;
    }
  }
  run.outcome.fallback_used = true;
  return run;
}

GroupKey group_by_video_prefix(int levels) {
  return [levels](const Verdict& v) {
    std::size_t pos = 0;
    for (int l = 0; l < levels; ++l) {
      pos = v.video.find('/', pos);
      if (pos == std::string::npos) return v.video;
      if (l + 1 < levels) ++pos;
    }
    return v.video.substr(0, pos);
  };
}

std::vector<PassRate> pass_rate(std::span<const Verdict> verdicts, const GroupKey& key) {
  std::map<std::string, PassRate> groups;
  for (const Verdict& v : verdicts) {
    if (v.attempt != 1) continue;
    PassRate& g = groups[key(v)];
    ++g.total;
    if (v.pass) ++g.passes;
  }
  if (groups.empty()) throw Error(Errc::kEmptyGroup, "no first-attempt verdicts");
  std::vector<PassRate> out;
  for (auto& [name, g] : groups) {
    g.group = name;
    g.rate = static_cast<double>(g.passes) / static_cast<double>(g.total);
    out.push_back(g);
  }
  return out;
}

std::vector<PassRate> pass_rate(std::span<const Verdict> verdicts, const GroupKey& key,
                                std::span<const std::string> groups) {
  std::vector<PassRate> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    PassRate g;
    g.group = groups[i];
    for (const Verdict& v : verdicts) {
      if (v.attempt != 1 || key(v) != g.group) continue;
      ++g.total;
      if (v.pass) ++g.passes;
    }
    if (g.total == 0) throw Error(Errc::kEmptyGroup, "group '" + g.group + "' has no verdicts", i);
    g.rate = static_cast<double>(g.passes) / static_cast<double>(g.total);
    out.push_back(g);
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::kLengthMismatch, "pearson inputs differ in length");
  if (x.size() < 2) throw Error(Errc::kTooShort, "pearson needs at least 2 samples");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) throw Error(Errc::kConstantInput, "pearson input is constant");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double judge_human_correlation(std::span<const Verdict> verdicts) {
  std::vector<double> judged;
  std::vector<double> human;
  for (const Verdict& v : verdicts) {
    if (!v.human) continue;
    judged.push_back(v.pass ? 1.0 : 0.0);
    human.push_back(*v.human ? 1.0 : 0.0);
  }
  return pearson(judged, human);
}

}  // namespace poseloop
