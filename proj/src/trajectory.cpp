#include "poseloop/trajectory.hpp"

#include <cmath>
#include <string>

#include "poseloop/error.hpp"

namespace poseloop {

PoseTrajectory::PoseTrajectory(std::vector<TimedPose> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(Errc::kInvalidArgument, "trajectory must not be empty");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].t)) {
      throw Error(Errc::kInvalidArgument, "non-finite timestamp", i);
    }
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
      throw Error(Errc::kInvalidArgument, "timestamps must be strictly increasing", i);
    }
  }
}

PoseTrajectory PoseTrajectory::from_poses(const std::vector<Pose>& poses, double fps) {
  if (!(fps > 0.0)) throw Error(Errc::kInvalidArgument, "fps must be positive");
  std::vector<TimedPose> samples;
  samples.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    samples.push_back({static_cast<double>(i) / fps, poses[i]});
  }
  return PoseTrajectory(std::move(samples));
}

PoseTrajectory PoseTrajectory::with_poses(const std::vector<Pose>& poses) const {
  if (poses.size() != samples_.size()) {
    throw Error(Errc::kLengthMismatch, "pose count " + std::to_string(poses.size()) +
                                           " != trajectory length " +
                                           std::to_string(samples_.size()));
  }
  std::vector<TimedPose> out = samples_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].pose = poses[i];
  return PoseTrajectory(std::move(out));
}

std::vector<Pose> PoseTrajectory::poses() const {
  std::vector<Pose> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.pose);
  return out;
}

std::vector<Quat> hemisphere_aligned(const PoseTrajectory& traj) {
  std::vector<Quat> out;
  out.reserve(traj.size());
  for (const auto& s : traj) {
    Quat q = s.pose.rotation();
    if (!out.empty() && out.back().dot(q) < 0.0) q.coeffs() = -q.coeffs();
    out.push_back(q);
  }
  return out;
}

}  // namespace poseloop
