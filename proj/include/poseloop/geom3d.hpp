#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace poseloop {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

// Unit quaternion with w >= 0. When w == 0 the first nonzero of (x, y, z)
// is made positive, so q and -q always map to the same stored value.
Quat canonical(const Quat& q);

/// Rigid transform: x -> R x + t. Translation in meters.
///
/// The stored rotation is always normalized and canonical. Composition
/// follows the usual convention: compose(a, b) applies b first.
class Pose {
 public:
  Pose() : translation_(Vec3::Zero()), rotation_(Quat::Identity()) {}
  Pose(const Vec3& translation, const Quat& rotation);

  static Pose identity() { return {}; }
  static Pose from_translation(double x, double y, double z);
  static Pose from_rotation(const Quat& q) { return {Vec3::Zero(), q}; }
  // Axis need not be normalized. Angle in radians.
  static Pose from_axis_angle(const Vec3& axis, double angle_rad,
                              const Vec3& translation = Vec3::Zero());

  const Vec3& translation() const { return translation_; }
  const Quat& rotation() const { return rotation_; }
  Eigen::Matrix3d rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
  Vec3 operator*(const Vec3& x) const { return apply(x); }
  Pose operator*(const Pose& other) const;

 private:
  Vec3 translation_;
  Quat rotation_;
};

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

// Geodesic angle between two orientations, degrees in [0, 180]. Sign of
// either quaternion is irrelevant.
double rotation_angle(const Quat& q1, const Quat& q2);

/// Axis-angle vector (radians). quat_to_rotvec returns magnitude in [0, pi].
Vec3 quat_to_rotvec(const Quat& q);
Quat rotvec_to_quat(const Vec3& v);

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws Errc::kInvalidIntrinsics.
  void validate() const;
  bool contains(const Vec2& px) const;
};

// Throws Errc::kNonPositiveDepth for z <= 0.
Vec2 project(const CameraIntrinsics& K, const Vec3& p);
// `depth` is the camera-frame z. Throws Errc::kInvalidDepth unless finite and > 0.
Vec3 backproject(const CameraIntrinsics& K, const Vec2& px, double depth);

}  // namespace poseloop
