#pragma once

#include "poseloop/geom3d.hpp"
#include "poseloop/trajectory.hpp"

namespace poseloop {

/// Object pose expressed in the end-effector frame, fixed at grasp time.
///
/// Folds the object-in-gripper and gripper-to-end-effector transforms into
/// one offset. Immutable once captured.
class GraspTransform {
 public:
  GraspTransform() = default;

  // offset = inverse(ee_at_grasp) * object_at_grasp
  static GraspTransform capture(const Pose& object_at_grasp, const Pose& ee_at_grasp,
                                double grasp_time = 0.0);
  // offset = gripper_in_ee * object_in_gripper
  static GraspTransform from_parts(const Pose& gripper_in_ee, const Pose& object_in_gripper,
                                   double grasp_time = 0.0);
  static GraspTransform from_offset(const Pose& offset, double grasp_time = 0.0) {
    return GraspTransform(offset, grasp_time);
  }

  const Pose& offset() const { return offset_; }
  double grasp_time() const { return grasp_time_; }

 private:
  GraspTransform(const Pose& offset, double grasp_time)
      : offset_(offset), grasp_time_(grasp_time) {}

  Pose offset_;
  double grasp_time_ = 0.0;
};

// Commanded end-effector pose per timestamp of the source object trajectory.
struct EndEffectorTrajectory {
  PoseTrajectory poses;

  std::size_t size() const { return poses.size(); }
  const Pose& pose(std::size_t i) const { return poses.pose(i); }
};

GraspTransform grasp_offset(const Pose& object_at_grasp, const Pose& ee_at_grasp);

// E(t) = O(t) * inverse(offset)
EndEffectorTrajectory retarget_trajectory(const PoseTrajectory& object, const GraspTransform& g);

// compose(ee, offset): where the object should be when the end effector is at `ee`.
Pose expected_object_pose(const Pose& ee, const GraspTransform& g);

PoseTrajectory object_trajectory(const EndEffectorTrajectory& ee, const GraspTransform& g);

}  // namespace poseloop
