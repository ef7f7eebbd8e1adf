#pragma once

#include <cstddef>
#include <vector>

#include "poseloop/geom3d.hpp"

namespace poseloop {

struct TimedPose {
  double t = 0.0;  // seconds
  Pose pose;
};

// Non-empty, strictly increasing timestamps. Enforced on construction.
class PoseTrajectory {
 public:
  PoseTrajectory() = default;
  explicit PoseTrajectory(std::vector<TimedPose> samples);

  // Uniformly sampled at `fps`, starting from t = 0.
  static PoseTrajectory from_poses(const std::vector<Pose>& poses, double fps);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const TimedPose& operator[](std::size_t i) const { return samples_[i]; }
  const Pose& pose(std::size_t i) const { return samples_[i].pose; }
  double time(std::size_t i) const { return samples_[i].t; }
  const std::vector<TimedPose>& samples() const { return samples_; }

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  // Same timestamps, new poses. Throws kLengthMismatch.
  PoseTrajectory with_poses(const std::vector<Pose>& poses) const;
  std::vector<Pose> poses() const;

 private:
  std::vector<TimedPose> samples_;
};

// Sign-aligned copy of the rotations: each quaternion is flipped if needed
// so that its dot product with the previous (aligned) one is non-negative.
std::vector<Quat> hemisphere_aligned(const PoseTrajectory& traj);

}  // namespace poseloop
