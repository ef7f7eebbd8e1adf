#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "poseloop/depthfit.hpp"
#include "poseloop/geom3d.hpp"
#include "poseloop/trajectory.hpp"

namespace poseloop {

struct Track {
  std::vector<Vec2> xy;   // pixels, one per frame
  std::vector<bool> vis;  // one per frame
};

struct TrackSet {
  int frame_count = 0;
  std::vector<Track> tracks;

  std::size_t track_count() const { return tracks.size(); }
  // Throws kInvalidArgument for ragged tracks or visible points outside K's image.
  void validate(const CameraIntrinsics& K) const;
  std::size_t visible_count(int frame) const;
};

/// Frame-0 camera-frame 3D points, one per track.
struct ModelPoints {
  std::vector<Vec3> points;
  std::vector<bool> valid;

  std::size_t valid_count() const;
};

// Bilinear depth lookup. Returns nullopt outside the raster or if any
// neighbor with nonzero weight is NaN.
std::optional<double> sample_depth_bilinear(const DepthMap& depth, const Vec2& px);

// Throws kDimensionMismatch, kNoValidPoints (< 4 valid).
ModelPoints lift_tracks(const TrackSet& tracks, const DepthMap& depth0, const CameraIntrinsics& K);

struct PnPResult {
  Pose pose;
  std::vector<bool> inliers;
  double mean_reprojection_error = 0.0;  // pixels, over inliers
  int iterations = 0;
  // Sum of squared residuals after each accepted step, starting from the
  // initial estimate.
  std::vector<double> accepted_costs;

  std::size_t inlier_count() const;
};

struct RefineOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double initial_damping = 1e-3;
};

// Pose maps model points into the observing camera frame.
// Throws kLengthMismatch, kTooFewPoints (< 4), kDiverged.
PnPResult pnp_refine(std::span<const Vec3> points, std::span<const Vec2> pixels,
                     const CameraIntrinsics& K, const Pose& init,
                     const RefineOptions& options = {});

// Rotation identity; translation puts the model centroid on the ray through
// the mean observed pixel at the given depth.
Pose centroid_init(std::span<const Vec3> points, std::span<const Vec2> pixels,
                   const CameraIntrinsics& K, double depth);
// Same, with the depth guessed from the ratio of 3D to 2D spread.
Pose centroid_init(std::span<const Vec3> points, std::span<const Vec2> pixels,
                   const CameraIntrinsics& K);

struct RansacConfig {
  int iterations = 200;
  double threshold_px = 3.0;
  std::size_t min_inliers = 0;
  std::uint64_t seed = 0;
  RefineOptions refine;
};

// Best 4-point hypothesis by inlier count, then a full refine on its inliers.
// Throws kTooFewPoints, kNoConsensus.
PnPResult pnp_ransac(std::span<const Vec3> points, std::span<const Vec2> pixels,
                     const CameraIntrinsics& K, const RansacConfig& cfg,
                     const std::optional<Pose>& init = std::nullopt);

struct TrackingConfig {
  double fps = 15.0;
  bool use_ransac = true;
  RansacConfig ransac;
};

enum class FrameStatus { kEstimated, kCarriedForward };

struct TrackingResult {
  // Motion of the object relative to frame 0, camera frame. pose(0) = identity.
  PoseTrajectory trajectory;
  std::vector<FrameStatus> status;
  std::vector<std::size_t> correspondences;  // visible valid tracks per frame
  std::vector<std::size_t> inliers;          // 0 when carried forward

  std::size_t carried_forward_count() const;
};

// Throws kNoValidPoints when frame 0 lifts fewer than 4 points.
TrackingResult track_trajectory(const TrackSet& tracks, const DepthMap& depth0,
                                const CameraIntrinsics& K, const TrackingConfig& cfg = {});

// Centered moving average. Translations per axis; rotations as rotation
// vectors in the tangent space of the window's center sample. The window
// shrinks symmetrically near the ends. Throws kEvenWindow.
PoseTrajectory smooth_trajectory(const PoseTrajectory& traj, int window = 5);

}  // namespace poseloop
