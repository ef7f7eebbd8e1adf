#include <cmath>
#include <string>

#include "poseloop/error.hpp"
#include "poseloop/trackfit.hpp"

namespace poseloop {

void TrackSet::validate(const CameraIntrinsics& K) const {
  if (frame_count < 1) throw Error(Errc::kInvalidArgument, "frame_count must be >= 1");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Track& tr = tracks[i];
    if (tr.xy.size() != static_cast<std::size_t>(frame_count) ||
        tr.vis.size() != static_cast<std::size_t>(frame_count)) {
      throw Error(Errc::kInvalidArgument, "track length differs from frame_count", i);
    }
    for (int f = 0; f < frame_count; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      if (!tr.vis[fi]) continue;
      if (!tr.xy[fi].allFinite() || !K.contains(tr.xy[fi])) {
        throw Error(Errc::kInvalidArgument,
                    "visible position outside the image at frame " + std::to_string(f), i);
      }
    }
  }
}

std::size_t TrackSet::visible_count(int frame) const {
  std::size_t n = 0;
  for (const auto& tr : tracks) {
    if (tr.vis[static_cast<std::size_t>(frame)]) ++n;
  }
  return n;
}

std::size_t ModelPoints::valid_count() const {
  std::size_t n = 0;
  for (bool v : valid) n += v ? 1 : 0;
  return n;
}

std::optional<double> sample_depth_bilinear(const DepthMap& depth, const Vec2& px) {
  const double u = px.x();
  const double v = px.y();
  if (!(u >= 0.0 && v >= 0.0 && u <= depth.width() - 1 && v <= depth.height() - 1)) {
    return std::nullopt;
  }
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double ax = u - x0;
  const double ay = v - y0;
  const double weights[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  const int dx[4] = {0, 1, 0, 1};
  const int dy[4] = {0, 0, 1, 1};
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (weights[k] == 0.0) continue;
    const double d = depth.at(x0 + dx[k], y0 + dy[k]);
    if (!std::isfinite(d)) return std::nullopt;
    acc += weights[k] * d;
  }
  return acc;
}

ModelPoints lift_tracks(const TrackSet& tracks, const DepthMap& depth0, const CameraIntrinsics& K) {
  if (depth0.width() != K.width || depth0.height() != K.height) {
    throw Error(Errc::kDimensionMismatch, "depth raster does not match intrinsics image size");
  }
  ModelPoints model;
  model.points.assign(tracks.track_count(), Vec3::Zero());
  model.valid.assign(tracks.track_count(), false);
  for (std::size_t i = 0; i < tracks.track_count(); ++i) {
    const Track& tr = tracks.tracks[i];
    if (tr.vis.empty() || !tr.vis[0]) continue;
    const auto d = sample_depth_bilinear(depth0, tr.xy[0]);
    if (!d || !(*d > 0.0)) continue;
    model.points[i] = backproject(K, tr.xy[0], *d);
    model.valid[i] = true;
  }
  if (model.valid_count() < 4) {
    throw Error(Errc::kNoValidPoints, "fewer than 4 tracks have valid frame-0 depth");
  }
  return model;
}

}  // namespace poseloop
