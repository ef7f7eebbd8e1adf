#include "poseloop/geom3d.hpp"

#include <cmath>
#include <numbers>

#include "poseloop/error.hpp"

namespace poseloop {

Quat canonical(const Quat& q) {
  Quat out = q.normalized();
  bool flip = false;
  if (out.w() < 0.0) {
    flip = true;
  } else if (out.w() == 0.0) {
    for (double c : {out.x(), out.y(), out.z()}) {
      if (c != 0.0) {
        flip = c < 0.0;
        break;
      }
    }
  }
  if (flip) out.coeffs() = -out.coeffs();
  return out;
}

Pose::Pose(const Vec3& translation, const Quat& rotation)
    : translation_(translation), rotation_(canonical(rotation)) {}

Pose Pose::from_translation(double x, double y, double z) {
  return {Vec3(x, y, z), Quat::Identity()};
}

Pose Pose::from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& translation) {
  return {translation, Quat(Eigen::AngleAxisd(angle_rad, axis.normalized()))};
}

Pose Pose::operator*(const Pose& other) const { return compose(*this, other); }

Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation() * b.translation() + a.translation(), a.rotation() * b.rotation()};
}

Pose inverse(const Pose& p) {
  const Quat q_inv = p.rotation().conjugate();
  return {-(q_inv * p.translation()), q_inv};
}

double rotation_angle(const Quat& q1, const Quat& q2) {
  // Same angle as 2*acos(|<q1,q2>|), but atan2 keeps full precision near 0.
  const Quat rel = q1.normalized().conjugate() * q2.normalized();
  const double s = rel.vec().norm();
  const double c = std::abs(rel.w());
  return 2.0 * std::atan2(s, c) * 180.0 / std::numbers::pi;
}

Vec3 quat_to_rotvec(const Quat& q) {
  const Quat c = canonical(q);
  const double n = c.vec().norm();
  if (n == 0.0) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(n, c.w());
  return c.vec() * (angle / n);
}

Quat rotvec_to_quat(const Vec3& v) {
  const double theta = v.norm();
  const double half = 0.5 * theta;
  // sin(theta/2)/theta, series-expanded near zero.
  const double k = theta < 1e-8 ? 0.5 - theta * theta / 48.0 : std::sin(half) / theta;
  Quat q(std::cos(half), k * v.x(), k * v.y(), k * v.z());
  q.normalize();
  return q;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(Errc::kInvalidIntrinsics, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(Errc::kInvalidIntrinsics, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(Errc::kInvalidIntrinsics, "principal point outside image");
  }
}

bool CameraIntrinsics::contains(const Vec2& px) const {
  return px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= width - 1 && px.y() <= height - 1;
}

Vec2 project(const CameraIntrinsics& K, const Vec3& p) {
  if (!(p.z() > 0.0)) throw Error(Errc::kNonPositiveDepth, "point at or behind the camera");
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Vec3 backproject(const CameraIntrinsics& K, const Vec2& px, double depth) {
  if (!std::isfinite(depth) || depth <= 0.0) {
    throw Error(Errc::kInvalidDepth, "depth must be finite and positive");
  }
  return {(px.x() - K.cx) / K.fx * depth, (px.y() - K.cy) / K.fy * depth, depth};
}

}  // namespace poseloop
