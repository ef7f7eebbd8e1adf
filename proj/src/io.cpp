#include "poseloop/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "poseloop/error.hpp"

namespace poseloop::io {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_error(const std::string& what, std::optional<std::size_t> index = {}) {
  throw Error(Errc::kParse, what, index);
}

Vec3 vec3_from(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) parse_error(std::string("\"") + key + "\" must be [x, y, z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

Quat quat_from(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 4) parse_error(std::string("\"") + key + "\" must be [w, x, y, z]");
  Quat q(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>());
  const double n = q.norm();
  if (!std::isfinite(n) || n < 1e-12) parse_error(std::string("\"") + key + "\" is not a rotation");
  q.coeffs() /= n;
  return q;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[at + k]) << (8 * k);
  return v;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  const std::string s = read_text(path);
  return {s.begin(), s.end()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  write_text(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string dump_lines(const std::vector<ojson>& lines) {
  std::string out;
  for (const ojson& j : lines) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

ojson deviation_json(const Deviation& d) {
  return {{"translation", d.translation}, {"rotation_deg", d.rotation_deg}};
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::kIo, "write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

std::vector<json> parse_jsonl(std::string_view text) {
  std::vector<json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      parse_error(e.what(), line_no);
    }
  }
  return out;
}

json pose_to_json(const Pose& p) {
  const Vec3& t = p.translation();
  const Quat& q = p.rotation();
  return {{"p", {t.x(), t.y(), t.z()}}, {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const json& j) {
  try {
    return Pose(vec3_from(j, "p"), quat_from(j, "q"));
  } catch (const json::exception& e) {
    parse_error(std::string("pose: ") + e.what());
  }
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics K;
  try {
    K.fx = j.at("fx").get<double>();
    K.fy = j.at("fy").get<double>();
    K.cx = j.at("cx").get<double>();
    K.cy = j.at("cy").get<double>();
    K.width = j.at("width").get<int>();
    K.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    parse_error(std::string("intrinsics: ") + e.what());
  }
  K.validate();
  return K;
}

json intrinsics_to_json(const CameraIntrinsics& K) {
  return {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx},
          {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
}

std::vector<std::uint8_t> encode_depth(const DepthMap& depth) {
  std::vector<std::uint8_t> out{'D', 'P', 'T', 'H'};
  out.reserve(12 + 4 * depth.size());
  put_u32(out, static_cast<std::uint32_t>(depth.width()));
  put_u32(out, static_cast<std::uint32_t>(depth.height()));
  for (double v : depth.values()) {
    const float f = std::isfinite(v) ? static_cast<float>(v) : std::numeric_limits<float>::quiet_NaN();
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

DepthMap decode_depth(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || bytes[0] != 'D' || bytes[1] != 'P' || bytes[2] != 'T' || bytes[3] != 'H') {
    parse_error("depth: missing DPTH header");
  }
  const std::uint32_t w = get_u32(bytes, 4);
  const std::uint32_t h = get_u32(bytes, 8);
  const std::uint64_t n = std::uint64_t{w} * h;
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16) || bytes.size() != 12 + 4 * n) {
    parse_error("depth: bad dimensions or truncated payload");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float f = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
    // Zero is a common "no reading" marker in sensor dumps.
    values[i] = std::isfinite(f) && f != 0.0f ? f : std::numeric_limits<double>::quiet_NaN();
  }
  return DepthMap(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

DepthMap read_depth(const std::filesystem::path& path) { return decode_depth(read_bytes(path)); }

void write_depth(const std::filesystem::path& path, const DepthMap& depth) {
  write_bytes(path, encode_depth(depth));
}

std::vector<std::uint8_t> encode_mask_pgm(const Mask& mask) {
  const std::string header =
      "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::uint8_t b : mask.bits()) out.push_back(b ? 255 : 0);
  return out;
}

Mask decode_mask_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  // Whitespace-separated header tokens; '#' comments run to end of line.
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
      t += static_cast<char>(bytes[pos++]);
    }
    return t;
  };
  if (token() != "P5") parse_error("mask: not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    parse_error("mask: bad PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) parse_error("mask: unsupported PGM");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - std::min(pos, bytes.size()) != n) parse_error("mask: truncated PGM payload");
  Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, bytes[pos + m.index(x, y)] != 0);
  }
  return m;
}

Mask read_mask(const std::filesystem::path& path) { return decode_mask_pgm(read_bytes(path)); }

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  write_bytes(path, encode_mask_pgm(mask));
}

TrackSet tracks_from_json(const json& j) {
  TrackSet set;
  try {
    set.frame_count = j.at("frame_count").get<int>();
    for (const json& tj : j.at("tracks")) {
      Track t;
      for (const json& p : tj.at("xy")) {
        if (!p.is_array() || p.size() != 2) parse_error("tracks: xy entries must be [u, v]");
        t.xy.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      for (const json& v : tj.at("vis")) t.vis.push_back(v.get<bool>());
      set.tracks.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    parse_error(std::string("tracks: ") + e.what());
  }
  return set;
}

json tracks_to_json(const TrackSet& tracks) {
  json arr = json::array();
  for (const Track& t : tracks.tracks) {
    json xy = json::array();
    for (const Vec2& p : t.xy) xy.push_back({p.x(), p.y()});
    json vis = json::array();
    for (bool v : t.vis) vis.push_back(v);
    arr.push_back({{"xy", std::move(xy)}, {"vis", std::move(vis)}});
  }
  return {{"frame_count", tracks.frame_count}, {"tracks", std::move(arr)}};
}

std::string trajectory_to_jsonl(const PoseTrajectory& traj) {
  std::vector<ojson> lines;
  for (const TimedPose& s : traj) {
    const json j = pose_to_json(s.pose);
    lines.push_back({{"t", s.t}, {"p", j["p"]}, {"q", j["q"]}});
  }
  return dump_lines(lines);
}

std::string trajectory_to_csv(const PoseTrajectory& traj) {
  std::string out = "t,x,y,z,qw,qx,qy,qz\n";
  for (const TimedPose& s : traj) {
    const Vec3& t = s.pose.translation();
    const Quat& q = s.pose.rotation();
    const double v[] = {s.t, t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()};
    for (int k = 0; k < 8; ++k) {
      if (k) out += ',';
      out += json(v[k]).dump();
    }
    out += '\n';
  }
  return out;
}

PoseTrajectory trajectory_from_jsonl(std::string_view text) {
  const std::vector<json> lines = parse_jsonl(text);
  std::vector<TimedPose> samples;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      samples.push_back({lines[i].at("t").get<double>(), pose_from_json(lines[i])});
    } catch (const json::exception& e) {
      parse_error(std::string("trajectory: ") + e.what(), i + 1);
    } catch (const Error& e) {
      parse_error(e.what(), i + 1);
    }
  }
  return PoseTrajectory(std::move(samples));
}

std::string grasp_to_line(const GraspTransform& g) {
  const json j = pose_to_json(g.offset());
  return ojson{{"t", g.grasp_time()}, {"p", j["p"]}, {"q", j["q"]}}.dump() + "\n";
}

GraspTransform grasp_from_line(std::string_view text) {
  const std::vector<json> lines = parse_jsonl(text);
  if (lines.size() != 1) parse_error("grasp: expected exactly one record");
  try {
    return GraspTransform::from_offset(pose_from_json(lines[0]), lines[0].value("t", 0.0));
  } catch (const json::exception& e) {
    parse_error(std::string("grasp: ") + e.what());
  }
}

ojson perturbation_to_json(const Perturbation& p) {
  json trigger = {{p.trigger_kind == TriggerKind::kTick ? "tick" : "waypoint", p.trigger}};
  json magnitude;
  if (p.kind == PerturbationKind::kObservationNoise) {
    magnitude = {{"translation_std", p.noise_translation},
                 {"rotation_std_deg", p.noise_rotation_deg}};
  } else {
    magnitude = pose_to_json(p.delta);
  }
  return {{"kind", std::string(perturbation_kind_name(p.kind))},
          {"trigger", std::move(trigger)},
          {"magnitude", std::move(magnitude)},
          {"seed", p.seed}};
}

Perturbation perturbation_from_json(const json& j) {
  Perturbation p;
  try {
    p.kind = parse_perturbation_kind(j.at("kind").get<std::string>());
    const json& tr = j.at("trigger");
    if (tr.is_number_integer()) {
      p.trigger = tr.get<long>();
    } else if (tr.contains("tick")) {
      p.trigger = tr.at("tick").get<long>();
    } else if (tr.contains("waypoint")) {
      p.trigger_kind = TriggerKind::kWaypoint;
      p.trigger = tr.at("waypoint").get<long>();
    } else {
      parse_error("perturbation: trigger needs \"tick\" or \"waypoint\"");
    }
    const json& m = j.at("magnitude");
    if (p.kind == PerturbationKind::kObservationNoise) {
      p.noise_translation = m.value("translation_std", 0.0);
      p.noise_rotation_deg = m.value("rotation_std_deg", 0.0);
    } else {
      const Vec3 t = m.contains("p") ? vec3_from(m, "p") : Vec3::Zero();
      const Quat q = m.contains("q") ? quat_from(m, "q") : Quat::Identity();
      p.delta = Pose(t, q);
    }
    p.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    parse_error(std::string("perturbation: ") + e.what());
  }
  return p;
}

std::vector<Perturbation> perturbations_from_jsonl(std::string_view text) {
  const std::vector<json> lines = parse_jsonl(text);
  std::vector<Perturbation> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(perturbation_from_json(lines[i]));
    } catch (const Error& e) {
      parse_error(e.what(), i + 1);
    }
  }
  return out;
}

std::string execution_log_to_jsonl(const ExecutionLog& log) {
  std::vector<ojson> lines;
  for (const TickRecord& r : log.records) {
    ojson j = {{"type", "tick"},
              {"tick", r.tick},
              {"waypoint", r.waypoint},
              {"event", std::string(tick_event_name(r.event))},
              {"commanded_ee", pose_to_json(r.commanded_ee)},
              {"ee", pose_to_json(r.ee)},
              {"observed_object", pose_to_json(r.observed_object)},
              {"expected_object", pose_to_json(r.expected_object)},
              {"deviation", deviation_json(r.dev)}};
    if (r.backtrack_to) j["backtrack_to"] = *r.backtrack_to;
    lines.push_back(std::move(j));
  }
  const ExecutionSummary& s = log.summary;
  lines.push_back({{"type", "summary"},
                   {"status", std::string(execution_status_name(s.status))},
                   {"completed", s.completed},
                   {"backtracks", s.backtracks},
                   {"ticks", s.ticks},
                   {"final_deviation", deviation_json(s.final_deviation)}});
  return dump_lines(lines);
}

std::string execution_log_to_csv(const ExecutionLog& log) {
  std::string out =
      "tick,waypoint,event,ee_x,ee_y,ee_z,obj_x,obj_y,obj_z,dev_translation,dev_rotation_deg,"
      "backtrack_to\n";
  for (const TickRecord& r : log.records) {
    const Vec3& e = r.ee.translation();
    const Vec3& o = r.observed_object.translation();
    out += std::to_string(r.tick) + ',' + std::to_string(r.waypoint) + ',' +
           std::string(tick_event_name(r.event));
    for (double v : {e.x(), e.y(), e.z(), o.x(), o.y(), o.z(), r.dev.translation,
                     r.dev.rotation_deg}) {
      out += ',' + json(v).dump();
    }
    out += ',';
    if (r.backtrack_to) out += std::to_string(*r.backtrack_to);
    out += '\n';
  }
  return out;
}

ojson verdict_to_json(const Verdict& v) {
  return {{"video", v.video},
          {"attempt", v.attempt},
          {"pass", v.pass},
          {"judge", v.judge},
          {"human", v.human ? ojson(*v.human) : ojson(nullptr)}};
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  try {
    v.video = j.at("video").get<std::string>();
    v.attempt = j.at("attempt").get<int>();
    v.pass = j.at("pass").get<bool>();
    v.judge = j.value("judge", std::string());
    if (j.contains("human") && !j.at("human").is_null()) v.human = j.at("human").get<bool>();
  } catch (const json::exception& e) {
    parse_error(std::string("verdict: ") + e.what());
  }
  if (v.attempt < 1) parse_error("verdict: attempt must be >= 1");
  return v;
}

std::string verdicts_to_jsonl(std::span<const Verdict> verdicts) {
  std::vector<ojson> lines;
  for (const Verdict& v : verdicts) lines.push_back(verdict_to_json(v));
  return dump_lines(lines);
}

std::vector<Verdict> verdicts_from_jsonl(std::string_view text) {
  const std::vector<json> lines = parse_jsonl(text);
  std::vector<Verdict> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(verdict_from_json(lines[i]));
    } catch (const Error& e) {
      parse_error(e.what(), i + 1);
    }
  }
  return out;
}

}  // namespace poseloop::io
