#include "poseloop/error.hpp"
#include "poseloop/trackfit.hpp"

namespace poseloop {

std::size_t TrackingResult::carried_forward_count() const {
  std::size_t n = 0;
  for (auto s : status) n += s == FrameStatus::kCarriedForward ? 1 : 0;
  return n;
}

TrackingResult track_trajectory(const TrackSet& tracks, const DepthMap& depth0,
                                const CameraIntrinsics& K, const TrackingConfig& cfg) {
  K.validate();
  tracks.validate(K);
  const ModelPoints model = lift_tracks(tracks, depth0, K);

  const auto frames = static_cast<std::size_t>(tracks.frame_count);
  std::vector<Pose> poses;
  TrackingResult result;
  poses.reserve(frames);
  poses.push_back(Pose::identity());
  result.status.push_back(FrameStatus::kEstimated);
  result.correspondences.push_back(model.valid_count());
  result.inliers.push_back(model.valid_count());

  Pose last_good = Pose::identity();
  std::vector<Vec3> pts;
  std::vector<Vec2> px;
  for (std::size_t f = 1; f < frames; ++f) {
    pts.clear();
    px.clear();
    for (std::size_t i = 0; i < tracks.track_count(); ++i) {
      if (!model.valid[i] || !tracks.tracks[i].vis[f]) continue;
      pts.push_back(model.points[i]);
      px.push_back(tracks.tracks[i].xy[f]);
    }
    result.correspondences.push_back(pts.size());

    std::optional<PnPResult> solved;
    if (pts.size() >= 4) {
      try {
        if (cfg.use_ransac) {
          RansacConfig rc = cfg.ransac;
          rc.seed = cfg.ransac.seed + f;
          solved = pnp_ransac(pts, px, K, rc, last_good);
        } else {
          solved = pnp_refine(pts, px, K, last_good, cfg.ransac.refine);
        }
      } catch (const Error& e) {
        if (e.code() != Errc::kNoConsensus && e.code() != Errc::kDiverged &&
            e.code() != Errc::kTooFewPoints) {
          throw;
        }
      }
    }
    if (solved) {
      last_good = solved->pose;
      result.status.push_back(FrameStatus::kEstimated);
      result.inliers.push_back(solved->inlier_count());
    } else {
      result.status.push_back(FrameStatus::kCarriedForward);
      result.inliers.push_back(0);
    }
    poses.push_back(last_good);
  }
  result.trajectory = PoseTrajectory::from_poses(poses, cfg.fps);
  return result;
}

}  // namespace poseloop
