#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "poseloop/error.hpp"
#include "poseloop/execsim.hpp"

namespace poseloop {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Table plane n . X = d in the camera frame, tilted away from the camera.
const Vec3 kTableNormal(0.0, 0.5, 0.8660254037844386);
constexpr double kTableOffset = 0.85;

struct Motion {
  Vec3 half_extents;
  Vec3 start;
  Quat start_rotation;
  Vec3 travel;
  Vec3 spin_axis;  // camera frame, applied on the left about the object center
  double spin_deg = 0.0;
  double occlusion_begin = 0.0;  // fractions of the sequence
  double occlusion_end = 0.0;
  double occlusion_fraction = 0.0;
  int occlusion_keep = -1;
};

double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }

Motion motion_for(TaskKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Motion m;
  m.start = Vec3(0.03 * u(rng), 0.01 + 0.02 * u(rng), 0.6 + 0.05 * u(rng));
  m.start_rotation = Quat(Eigen::AngleAxisd((-30.0 + 5.0 * u(rng)) * kDeg, Vec3::UnitX())) *
                     Quat(Eigen::AngleAxisd((30.0 + 10.0 * u(rng)) * kDeg, Vec3::UnitY()));
  switch (kind) {
    case TaskKind::kPour:
      // Lateral carry and a 60 degree roll; the center stays at constant depth.
      m.half_extents = Vec3(0.035, 0.06, 0.035);
      m.start.x() -= 0.05;
      m.travel = Vec3(0.10, 0.01 * u(rng), 0.0);
      m.spin_axis = Vec3::UnitZ();
      m.spin_deg = 60.0;
      break;
    case TaskKind::kLift:
      // Toward the camera.
      m.half_extents = Vec3(0.07, 0.012, 0.07);
      m.travel = Vec3(0.02 * u(rng), -0.04, -0.20);
      m.spin_axis = Vec3::UnitX();
      m.spin_deg = 10.0;
      break;
    case TaskKind::kPlace:
      m.half_extents = Vec3(0.11, 0.008, 0.025);
      m.start.x() -= 0.05;
      m.travel = Vec3(0.10, 0.03, 0.04);
      m.spin_axis = Vec3::UnitY();
      m.spin_deg = 30.0;
      m.occlusion_begin = 0.4;
      m.occlusion_end = 0.6;
      m.occlusion_fraction = 0.5;
      break;
    case TaskKind::kSweep:
      m.half_extents = Vec3(0.09, 0.02, 0.025);
      m.start.x() += 0.05;
      m.travel = Vec3(-0.10, 0.005 * u(rng), 0.0);
      m.spin_axis = Vec3::UnitY();
      m.spin_deg = 15.0;
      m.occlusion_begin = 0.45;
      m.occlusion_end = 0.6;
      m.occlusion_keep = 3;
      break;
  }
  return m;
}

// Entry distance along `dir` (camera frame, dir.z = 1) to the box, if hit.
std::optional<double> ray_box(const Vec3& dir, const Vec3& half, const Pose& object) {
  const Eigen::Matrix3d Rt = object.rotation_matrix().transpose();
  const Vec3 o = -(Rt * object.translation());
  const Vec3 d = Rt * dir;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (std::abs(o[k]) > half[k]) return std::nullopt;
      continue;
    }
    double t1 = (-half[k] - o[k]) / d[k];
    double t2 = (half[k] - o[k]) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || !(t_near > 0.0)) return std::nullopt;
  return t_near;
}

}  // namespace

std::string_view task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kPour: return "pour";
    case TaskKind::kLift: return "lift";
    case TaskKind::kPlace: return "place";
    case TaskKind::kSweep: return "sweep";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "pour") return TaskKind::kPour;
  if (name == "lift") return TaskKind::kLift;
  if (name == "place") return TaskKind::kPlace;
  if (name == "sweep") return TaskKind::kSweep;
  throw Error(Errc::kParse, "unknown task kind '" + std::string(name) + "'");
}

PoseTrajectory SyntheticTask::relative_trajectory() const {
  const Pose inv0 = inverse(object_trajectory.pose(0));
  std::vector<Pose> rel;
  rel.reserve(object_trajectory.size());
  for (const auto& s : object_trajectory) rel.push_back(compose(s.pose, inv0));
  return object_trajectory.with_poses(rel);
}

void render_scene(const CameraIntrinsics& K, const Vec3& half_extents, const Pose& object_pose,
                  DepthMap& depth, Mask& mask) {
  depth = DepthMap(K.width, K.height);
  mask = Mask(K.width, K.height);
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const Vec3 dir((x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0);
      double z = kTableOffset / kTableNormal.dot(dir);
      if (const auto hit = ray_box(dir, half_extents, object_pose); hit && *hit < z) {
        z = *hit;
        mask.set(x, y);
      }
      depth.set(x, y, z);
    }
  }
}

SyntheticTask gen_synthetic_task(TaskKind kind, std::uint64_t seed,
                                 const SyntheticTaskOptions& options) {
  if (options.frames < 2 || options.track_count < 4 || !(options.fps > 0.0)) {
    throw Error(Errc::kInvalidArgument, "synthetic task needs >= 2 frames and >= 4 tracks");
  }
  if (!(options.outlier_fraction >= 0.0 && options.outlier_fraction <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "outlier_fraction must lie in [0, 1]");
  }
  // Separate streams keep the geometry identical across outlier/occlusion settings.
  std::mt19937_64 geometry_rng(seed * 4 + 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 noise_rng(seed * 4 + 1);
  std::mt19937_64 depth_rng(seed * 4 + 2);

  SyntheticTask task;
  task.kind = kind;
  task.seed = seed;
  task.K = {300.0, 300.0, 159.5, 119.5, 320, 240};

  Motion m = motion_for(kind, geometry_rng);
  if (options.occlusion_fraction) {
    m.occlusion_fraction = *options.occlusion_fraction;
    m.occlusion_keep = -1;
  }
  if (options.occlusion_keep) {
    m.occlusion_keep = *options.occlusion_keep;
    m.occlusion_fraction = 0.0;
  }
  if (m.occlusion_begin == m.occlusion_end && (m.occlusion_fraction > 0.0 || m.occlusion_keep >= 0)) {
    m.occlusion_begin = 0.4;
    m.occlusion_end = 0.6;
  }
  task.half_extents = m.half_extents;

  const int F = options.frames;
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(F));
  for (int f = 0; f < F; ++f) {
    const double s = smoothstep(static_cast<double>(f) / (F - 1));
    const Quat spin(Eigen::AngleAxisd(m.spin_deg * kDeg * s, m.spin_axis));
    poses.emplace_back(m.start + s * m.travel, spin * m.start_rotation);
  }
  task.object_trajectory = PoseTrajectory::from_poses(poses, options.fps);

  render_scene(task.K, m.half_extents, poses[0], task.depth0, task.mask0);

  // Tracks start on integer pixels of the object so that lifting is exact.
  std::vector<std::pair<int, int>> candidates;
  for (int y = 0; y < task.K.height; ++y) {
    for (int x = 0; x < task.K.width; ++x) {
      if (task.mask0.at(x, y)) candidates.emplace_back(x, y);
    }
  }
  if (candidates.size() < 4) throw Error(Errc::kInvalidArgument, "object not visible at frame 0");
  std::shuffle(candidates.begin(), candidates.end(), geometry_rng);
  const std::size_t T = std::min<std::size_t>(candidates.size(),
                                              static_cast<std::size_t>(options.track_count));
  const Pose inv0 = inverse(poses[0]);
  for (std::size_t i = 0; i < T; ++i) {
    const Vec2 px(candidates[i].first, candidates[i].second);
    const Vec3 cam = backproject(task.K, px, task.depth0.at(candidates[i].first, candidates[i].second));
    task.track_points.push_back(inv0.apply(cam));
  }

  task.occlusion_begin = static_cast<int>(std::lround(m.occlusion_begin * F));
  task.occlusion_end = static_cast<int>(std::lround(m.occlusion_end * F));
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), geometry_rng);
  std::size_t hidden_count = 0;
  if (m.occlusion_keep >= 0) {
    hidden_count = T - std::min<std::size_t>(T, static_cast<std::size_t>(m.occlusion_keep));
  } else if (m.occlusion_fraction > 0.0) {
    hidden_count = static_cast<std::size_t>(std::ceil(m.occlusion_fraction * static_cast<double>(T)));
  }
  std::vector<bool> occludable(T, false);
  for (std::size_t k = 0; k < hidden_count; ++k) occludable[order[k]] = true;

  task.tracks.frame_count = F;
  task.tracks.tracks.resize(T);
  task.outlier.assign(T, std::vector<bool>(static_cast<std::size_t>(F), false));
  for (std::size_t i = 0; i < T; ++i) {
    Track& tr = task.tracks.tracks[i];
    tr.xy.resize(static_cast<std::size_t>(F), Vec2::Zero());
    tr.vis.resize(static_cast<std::size_t>(F), false);
    for (int f = 0; f < F; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      const Vec3 x = poses[fi].apply(task.track_points[i]);
      if (x.z() <= 0.0) {
        if (f > 0) tr.xy[fi] = tr.xy[fi - 1];
        continue;
      }
      tr.xy[fi] = project(task.K, x);
      const bool occluded = occludable[i] && f >= task.occlusion_begin && f < task.occlusion_end;
      tr.vis[fi] = !occluded && task.K.contains(tr.xy[fi]);
    }
  }
  if (options.outlier_fraction > 0.0) {
    std::uniform_real_distribution<double> ux(0.0, task.K.width - 1);
    std::uniform_real_distribution<double> uy(0.0, task.K.height - 1);
    for (int f = 1; f < F; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      std::vector<std::size_t> visible;
      for (std::size_t i = 0; i < T; ++i) {
        if (task.tracks.tracks[i].vis[fi]) visible.push_back(i);
      }
      std::shuffle(visible.begin(), visible.end(), noise_rng);
      const auto corrupt = static_cast<std::size_t>(
          std::lround(options.outlier_fraction * static_cast<double>(visible.size())));
      for (std::size_t k = 0; k < corrupt; ++k) {
        const double px = ux(noise_rng);
        const double py = uy(noise_rng);
        task.tracks.tracks[visible[k]].xy[fi] = Vec2(px, py);
        task.outlier[visible[k]][fi] = true;
      }
    }
  }

  if (options.depth_sequence) {
    std::uniform_real_distribution<double> us(0.5, 2.0);
    std::uniform_real_distribution<double> ub(-0.2, 0.2);
    std::normal_distribution<double> flicker(0.0, 1.0);
    task.distortion.scale = us(depth_rng);
    task.distortion.shift = ub(depth_rng);
    const double s = task.distortion.scale;
    const double b = task.distortion.shift;
    for (int f = 0; f < F; ++f) {
      DepthMap real;
      Mask mask;
      render_scene(task.K, m.half_extents, poses[static_cast<std::size_t>(f)], real, mask);
      const double offset = options.flicker_std * flicker(depth_rng);
      DepthMap pred(real.width(), real.height());
      for (std::size_t k = 0; k < real.size(); ++k) {
        const double p = (real.values()[k] - b) / s + offset;
        if (p > 0.0) pred.values()[k] = p;
      }
      task.real_depth.push_back(std::move(real));
      task.predicted_depth.push_back(std::move(pred));
      task.masks.push_back(std::move(mask));
    }
  }
  return task;
}

}  // namespace poseloop
