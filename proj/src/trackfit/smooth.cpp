#include <algorithm>

#include "poseloop/error.hpp"
#include "poseloop/trackfit.hpp"

namespace poseloop {

PoseTrajectory smooth_trajectory(const PoseTrajectory& traj, int window) {
  if (window < 1) throw Error(Errc::kInvalidArgument, "window must be >= 1");
  if (window % 2 == 0) throw Error(Errc::kEvenWindow, "window must be odd");
  const auto n = static_cast<long>(traj.size());
  const long half = window / 2;
  const std::vector<Quat> q = hemisphere_aligned(traj);

  std::vector<Pose> out;
  out.reserve(traj.size());
  for (long i = 0; i < n; ++i) {
    const long h = std::min({half, i, n - 1 - i});
    const auto count = static_cast<double>(2 * h + 1);
    Vec3 t = Vec3::Zero();
    Vec3 w = Vec3::Zero();
    const Quat& center = q[static_cast<std::size_t>(i)];
    for (long j = i - h; j <= i + h; ++j) {
      const auto js = static_cast<std::size_t>(j);
      t += traj.pose(js).translation();
      w += quat_to_rotvec(center.conjugate() * q[js]);
    }
    out.emplace_back(t / count, center * rotvec_to_quat(w / count));
  }
  return traj.with_poses(out);
}

}  // namespace poseloop
