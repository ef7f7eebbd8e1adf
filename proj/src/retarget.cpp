#include "poseloop/retarget.hpp"

namespace poseloop {

GraspTransform GraspTransform::capture(const Pose& object_at_grasp, const Pose& ee_at_grasp,
                                       double grasp_time) {
  return {compose(inverse(ee_at_grasp), object_at_grasp), grasp_time};
}

GraspTransform GraspTransform::from_parts(const Pose& gripper_in_ee,
                                          const Pose& object_in_gripper, double grasp_time) {
  return {compose(gripper_in_ee, object_in_gripper), grasp_time};
}

GraspTransform grasp_offset(const Pose& object_at_grasp, const Pose& ee_at_grasp) {
  return GraspTransform::capture(object_at_grasp, ee_at_grasp);
}

EndEffectorTrajectory retarget_trajectory(const PoseTrajectory& object, const GraspTransform& g) {
  const Pose ee_from_object = inverse(g.offset());
  std::vector<Pose> ee;
  ee.reserve(object.size());
  for (const auto& s : object) ee.push_back(compose(s.pose, ee_from_object));
  return {object.with_poses(ee)};
}

Pose expected_object_pose(const Pose& ee, const GraspTransform& g) {
  return compose(ee, g.offset());
}

PoseTrajectory object_trajectory(const EndEffectorTrajectory& ee, const GraspTransform& g) {
  std::vector<Pose> obj;
  obj.reserve(ee.size());
  for (const auto& s : ee.poses) obj.push_back(expected_object_pose(s.pose, g));
  return ee.poses.with_poses(obj);
}

}  // namespace poseloop
