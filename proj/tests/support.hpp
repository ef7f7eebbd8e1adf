#pragma once

// Seeded generators and comparison helpers shared by the test binaries.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "poseloop/geom3d.hpp"
#include "poseloop/trajectory.hpp"

namespace poseloop::testing {

inline constexpr double kDeg = std::numbers::pi / 180.0;

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

// Uniform axis, angle uniform in [0, max_deg].
inline Quat random_rotation(std::mt19937_64& rng, double max_deg = 180.0) {
  std::uniform_real_distribution<double> u(0.0, max_deg * kDeg);
  return Quat(Eigen::AngleAxisd(u(rng), random_unit(rng)));
}

inline Pose random_pose(std::mt19937_64& rng, double max_deg = 180.0, double extent = 1.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {Vec3(u(rng), u(rng), u(rng)), random_rotation(rng, max_deg)};
}

inline double translation_error(const Pose& a, const Pose& b) {
  return (a.translation() - b.translation()).norm();
}

inline double rotation_error_deg(const Pose& a, const Pose& b) {
  return rotation_angle(a.rotation(), b.rotation());
}

// Gaussian increments in translation (meters) and rotation (degrees per axis).
inline PoseTrajectory random_walk(std::mt19937_64& rng, int n, double step_m, double step_deg,
                                  double fps = 15.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Pose> poses;
  Pose p = random_pose(rng, 180.0, 0.5);
  for (int i = 0; i < n; ++i) {
    poses.push_back(p);
    const Vec3 dt(g(rng), g(rng), g(rng));
    const Vec3 dr(g(rng), g(rng), g(rng));
    p = Pose(p.translation() + step_m * dt, rotvec_to_quat(step_deg * kDeg * dr) * p.rotation());
  }
  return PoseTrajectory::from_poses(poses, fps);
}

inline CameraIntrinsics test_camera() { return {500.0, 500.0, 320.0, 240.0, 640, 480}; }

}  // namespace poseloop::testing
