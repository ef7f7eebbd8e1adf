#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "poseloop/depthfit.hpp"
#include "poseloop/execsim.hpp"
#include "poseloop/filtergate.hpp"
#include "poseloop/geom3d.hpp"
#include "poseloop/retarget.hpp"
#include "poseloop/trackfit.hpp"
#include "poseloop/trajectory.hpp"

// File formats. Quaternions are always written [w, x, y, z].
//
//   intrinsics   {"fx","fy","cx","cy","width","height"}
//   depth        "DPTH", u32 width, u32 height, f32 values (LE, row-major, NaN invalid)
//   mask         binary PGM (P5), 255 set / 0 unset
//   tracks       {"frame_count": N, "tracks": [{"xy": [[u,v],...], "vis": [bool,...]}]}
//   trajectory   one {"t", "p": [x,y,z], "q": [w,x,y,z]} per line
//   grasp        one trajectory line, t = grasp time
//   perturbation one {"kind", "trigger", "magnitude", "seed"} per line
//   verdicts     one {"video", "attempt", "pass", "judge", "human"} per line
namespace poseloop::io {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
nlohmann::json read_json(const std::filesystem::path& path);
// Non-empty lines parsed as JSON; errors carry the 1-based line number.
std::vector<nlohmann::json> parse_jsonl(std::string_view text);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json intrinsics_to_json(const CameraIntrinsics& K);

std::vector<std::uint8_t> encode_depth(const DepthMap& depth);
DepthMap decode_depth(std::span<const std::uint8_t> bytes);
DepthMap read_depth(const std::filesystem::path& path);
void write_depth(const std::filesystem::path& path, const DepthMap& depth);

std::vector<std::uint8_t> encode_mask_pgm(const Mask& mask);
Mask decode_mask_pgm(std::span<const std::uint8_t> bytes);
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

TrackSet tracks_from_json(const nlohmann::json& j);
nlohmann::json tracks_to_json(const TrackSet& tracks);

std::string trajectory_to_jsonl(const PoseTrajectory& traj);
std::string trajectory_to_csv(const PoseTrajectory& traj);
PoseTrajectory trajectory_from_jsonl(std::string_view text);

std::string grasp_to_line(const GraspTransform& g);
GraspTransform grasp_from_line(std::string_view text);

nlohmann::ordered_json perturbation_to_json(const Perturbation& p);
Perturbation perturbation_from_json(const nlohmann::json& j);
std::vector<Perturbation> perturbations_from_jsonl(std::string_view text);

// Tick records followed by one {"type": "summary", ...} record.
std::string execution_log_to_jsonl(const ExecutionLog& log);
std::string execution_log_to_csv(const ExecutionLog& log);

nlohmann::ordered_json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);
std::string verdicts_to_jsonl(std::span<const Verdict> verdicts);
std::vector<Verdict> verdicts_from_jsonl(std::string_view text);

}  // namespace poseloop::io
