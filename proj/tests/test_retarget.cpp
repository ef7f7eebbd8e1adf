#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "poseloop/retarget.hpp"
#include "support.hpp"

using namespace poseloop;
using namespace poseloop::testing;

TEST(Retarget, HandWorkedOffset) {
  // End effector 10 cm above the object, both unrotated.
  const Pose object0 = Pose::from_translation(0.5, 0.0, 0.2);
  const Pose ee0 = Pose::from_translation(0.5, 0.0, 0.3);
  const GraspTransform g = grasp_offset(object0, ee0);
  EXPECT_LT((g.offset().translation() - Vec3(0, 0, -0.1)).norm(), 1e-15);

  const PoseTrajectory object = PoseTrajectory::from_poses(
      {object0, Pose::from_translation(0.6, 0.0, 0.2),
       Pose(Vec3(0.6, 0.0, 0.2), Quat(Eigen::AngleAxisd(90 * kDeg, Vec3::UnitX())))},
      10.0);
  const EndEffectorTrajectory ee = retarget_trajectory(object, g);
  EXPECT_LT((ee.pose(0).translation() - ee0.translation()).norm(), 1e-15);
  EXPECT_LT((ee.pose(1).translation() - Vec3(0.6, 0.0, 0.3)).norm(), 1e-15);
  // Rotating the object 90 deg about x swings the gripper from +z to -y.
  EXPECT_LT((ee.pose(2).translation() - Vec3(0.6, -0.1, 0.2)).norm(), 1e-15);
  EXPECT_EQ(ee.poses.time(2), object.time(2));
}

TEST(Retarget, CaptureAndPartsAgree) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Pose gripper_in_ee = random_pose(rng, 180, 0.1);
    const Pose object_in_gripper = random_pose(rng, 180, 0.1);
    const Pose ee = random_pose(rng);
    const GraspTransform parts = GraspTransform::from_parts(gripper_in_ee, object_in_gripper);
    const Pose object = expected_object_pose(ee, parts);
    const GraspTransform captured = GraspTransform::capture(object, ee);
    EXPECT_LT(translation_error(captured.offset(), parts.offset()), 1e-12);
    EXPECT_LT(rotation_error_deg(captured.offset(), parts.offset()), 1e-9);
  }
}

TEST(Retarget, ObjectTrajectoryInvertsRetargeting) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const PoseTrajectory src = random_walk(rng, 40, 0.01, 3.0);
    const GraspTransform g = GraspTransform::from_offset(random_pose(rng, 180, 0.2), 0.5);
    const PoseTrajectory back = object_trajectory(retarget_trajectory(src, g), g);
    ASSERT_EQ(back.size(), src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      EXPECT_LT(translation_error(back.pose(i), src.pose(i)), 1e-12);
      EXPECT_LT(rotation_error_deg(back.pose(i), src.pose(i)), 1e-9);
      EXPECT_EQ(back.time(i), src.time(i));
    }
  }
}

TEST(Retarget, GraspTimeIsKept) {
  const GraspTransform g = GraspTransform::capture(Pose(), Pose(), 1.25);
  EXPECT_EQ(g.grasp_time(), 1.25);
}
