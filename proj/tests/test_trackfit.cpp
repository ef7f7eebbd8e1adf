#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "poseloop/error.hpp"
#include "poseloop/execsim.hpp"
#include "poseloop/trackfit.hpp"
#include "support.hpp"

using namespace poseloop;
using namespace poseloop::testing;

namespace {

struct Scene {
  std::vector<Vec3> points;
  std::vector<Vec2> pixels;
  Pose truth;
};

// Object-frame points in a 20 cm cube, observed 0.6-1.0 m in front of the camera.
Scene make_scene(std::mt19937_64& rng, int n, double max_deg) {
  const CameraIntrinsics K = test_camera();
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  std::uniform_real_distribution<double> depth(0.6, 1.0);
  Scene s;
  s.truth = Pose(Vec3(u(rng), u(rng), depth(rng)), random_rotation(rng, max_deg));
  while (static_cast<int>(s.points.size()) < n) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const Vec2 px = project(K, s.truth.apply(p));
    if (!K.contains(px)) continue;
    s.points.push_back(p);
    s.pixels.push_back(px);
  }
  return s;
}

}  // namespace

TEST(TrackFit, BilinearDepth) {
  const DepthMap d(2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(*sample_depth_bilinear(d, Vec2(0.5, 0.5)), 2.5);
  EXPECT_DOUBLE_EQ(*sample_depth_bilinear(d, Vec2(1.0, 1.0)), 4.0);
  EXPECT_FALSE(sample_depth_bilinear(d, Vec2(1.0001, 0.0)));
  EXPECT_FALSE(sample_depth_bilinear(d, Vec2(-0.5, 0.0)));

  // A NaN neighbor only matters when it carries weight.
  const DepthMap holes(2, 2, std::vector<double>{1, NAN, 3, 4});
  EXPECT_DOUBLE_EQ(*sample_depth_bilinear(holes, Vec2(0.0, 0.5)), 2.0);
  EXPECT_FALSE(sample_depth_bilinear(holes, Vec2(0.5, 0.5)));
}

TEST(TrackFit, LiftBackprojectsFrameZero) {
  const CameraIntrinsics K = test_camera();
  const DepthMap depth(K.width, K.height, 0.8);
  TrackSet set;
  set.frame_count = 2;
  for (int i = 0; i < 6; ++i) {
    set.tracks.push_back({{Vec2(100 + 40 * i, 200), Vec2(0, 0)}, {i != 2, false}});
  }
  const ModelPoints m = lift_tracks(set, depth, K);
  EXPECT_EQ(m.valid_count(), 5u);
  EXPECT_FALSE(m.valid[2]);
  EXPECT_LT((m.points[0] - backproject(K, Vec2(100, 200), 0.8)).norm(), 1e-15);

  set.tracks.resize(4);
  EXPECT_THROW(lift_tracks(set, depth, K), Error);
  EXPECT_THROW(lift_tracks(set, DepthMap(10, 10, 1.0), K), Error);
}

TEST(TrackFit, RefineRecoversPoseAndCostNeverIncreases) {
  const CameraIntrinsics K = test_camera();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Scene s = make_scene(rng, 30, 60.0);
    const PnPResult r = pnp_refine(s.points, s.pixels, K, centroid_init(s.points, s.pixels, K));
    EXPECT_LT(translation_error(r.pose, s.truth), 1e-8) << trial;
    EXPECT_LT(rotation_error_deg(r.pose, s.truth), 1e-6) << trial;
    EXPECT_LT(r.mean_reprojection_error, 1e-6);
    EXPECT_EQ(r.inlier_count(), s.points.size());
    for (std::size_t k = 1; k < r.accepted_costs.size(); ++k) {
      EXPECT_LE(r.accepted_costs[k], r.accepted_costs[k - 1]);
    }
  }
}

TEST(TrackFit, RefineInputErrors) {
  const CameraIntrinsics K = test_camera();
  std::mt19937_64 rng(1);
  const Scene s = make_scene(rng, 4, 10.0);
  const std::span<const Vec3> pts(s.points);
  const std::span<const Vec2> px(s.pixels);
  try {
    pnp_refine(pts.first(3), px.first(3), K, s.truth);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooFewPoints);
  }
  try {
    pnp_refine(pts, px.first(3), K, s.truth);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kLengthMismatch);
  }
}

TEST(TrackFit, CentroidInitPlacesCentroidOnMeanRay) {
  const CameraIntrinsics K = test_camera();
  const std::vector<Vec3> pts{{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}, {0.1, 0.1, 0}};
  const std::vector<Vec2> px{{300, 200}, {340, 200}, {300, 240}, {340, 240}};
  const Pose p = centroid_init(pts, px, K, 2.0);
  EXPECT_LT((p.translation() + Vec3(0.05, 0.05, 0) - backproject(K, Vec2(320, 220), 2.0)).norm(),
            1e-12);
  EXPECT_EQ(p.rotation().coeffs(), Quat::Identity().coeffs());
}

TEST(TrackFit, RansacFlagsOutliers) {
  const CameraIntrinsics K = test_camera();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(0, 639), uy(0, 479);
  for (int trial = 0; trial < 20; ++trial) {
    Scene s = make_scene(rng, 60, 45.0);
    std::vector<bool> bad(s.points.size(), false);
    for (std::size_t i = 0; i < s.points.size(); i += 3) {
      const Vec2 moved(ux(rng), uy(rng));
      if ((moved - s.pixels[i]).norm() < 20.0) continue;
      s.pixels[i] = moved;
      bad[i] = true;
    }
    RansacConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const PnPResult r = pnp_ransac(s.points, s.pixels, K, cfg);
    EXPECT_LT(translation_error(r.pose, s.truth), 1e-8);
    EXPECT_LT(rotation_error_deg(r.pose, s.truth), 1e-6);
    for (std::size_t i = 0; i < bad.size(); ++i) EXPECT_EQ(r.inliers[i], !bad[i]) << i;
  }
}

TEST(TrackFit, RansacIsDeterministicPerSeed) {
  const CameraIntrinsics K = test_camera();
  std::mt19937_64 rng(9);
  Scene s = make_scene(rng, 40, 30.0);
  for (std::size_t i = 0; i < 12; ++i) s.pixels[i] += Vec2(50, -30);
  RansacConfig cfg;
  cfg.seed = 77;
  const PnPResult a = pnp_ransac(s.points, s.pixels, K, cfg);
  const PnPResult b = pnp_ransac(s.points, s.pixels, K, cfg);
  EXPECT_EQ(a.pose.translation(), b.pose.translation());
  EXPECT_EQ(a.pose.rotation().coeffs(), b.pose.rotation().coeffs());
  EXPECT_EQ(a.inliers, b.inliers);
}

TEST(TrackFit, RansacWithoutConsensus) {
  const CameraIntrinsics K = test_camera();
  std::mt19937_64 rng(6);
  const Scene s = make_scene(rng, 20, 30.0);
  RansacConfig cfg;
  cfg.min_inliers = 21;
  try {
    pnp_ransac(s.points, s.pixels, K, cfg);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoConsensus);
  }
}

TEST(TrackFit, TrackingMatchesGeneratorMotion) {
  for (TaskKind kind : {TaskKind::kPour, TaskKind::kLift}) {
    const SyntheticTask task = gen_synthetic_task(kind, 3);
    const TrackingResult r = track_trajectory(task.tracks, task.depth0, task.K);
    const PoseTrajectory truth = task.relative_trajectory();
    ASSERT_EQ(r.trajectory.size(), truth.size());
    EXPECT_EQ(r.trajectory.pose(0).translation(), Vec3::Zero());
    EXPECT_EQ(r.carried_forward_count(), 0u);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      EXPECT_LT(translation_error(r.trajectory.pose(i), truth.pose(i)), 1e-6) << i;
      EXPECT_LT(rotation_error_deg(r.trajectory.pose(i), truth.pose(i)), 1e-4) << i;
    }
  }
}

TEST(TrackFit, TrackLossCarriesLastPoseForward) {
  SyntheticTaskOptions opts;
  opts.occlusion_keep = 3;
  const SyntheticTask task = gen_synthetic_task(TaskKind::kSweep, 5, opts);
  const TrackingResult r = track_trajectory(task.tracks, task.depth0, task.K);
  const auto window = static_cast<std::size_t>(task.occlusion_end - task.occlusion_begin);
  ASSERT_GT(window, 0u);
  EXPECT_EQ(r.carried_forward_count(), window);
  const auto b = static_cast<std::size_t>(task.occlusion_begin);
  for (std::size_t f = b; f < b + window; ++f) {
    EXPECT_EQ(r.status[f], FrameStatus::kCarriedForward);
    EXPECT_LE(r.correspondences[f], 3u);
    EXPECT_EQ(r.trajectory.pose(f).translation(), r.trajectory.pose(b - 1).translation());
  }
  // Tracking resumes after the window.
  EXPECT_EQ(r.status[b + window], FrameStatus::kEstimated);
}

TEST(TrackFit, MovingAverageHandOracle) {
  std::vector<Pose> poses;
  for (double x : {0.0, 0.0, 3.0, 0.0, 0.0}) poses.push_back(Pose::from_translation(x, 0, 0));
  const PoseTrajectory s = smooth_trajectory(PoseTrajectory::from_poses(poses, 10.0), 3);
  const double want[] = {0.0, 1.0, 1.0, 1.0, 0.0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.pose(i).translation().x(), want[i], 1e-15);
}

TEST(TrackFit, MovingAveragePreservesUniformMotion) {
  // Constant-rate translation and rotation about a fixed axis are fixed
  // points of every symmetric window, including the shrunken end windows.
  std::vector<Pose> poses;
  for (int i = 0; i < 30; ++i) {
    poses.emplace_back(Vec3(0.01 * i, -0.02 * i, 0.5),
                       Quat(Eigen::AngleAxisd(3.0 * kDeg * i, Vec3(1, 1, 0).normalized())));
  }
  const PoseTrajectory traj = PoseTrajectory::from_poses(poses, 15.0);
  for (int w : {1, 3, 5, 9}) {
    const PoseTrajectory s = smooth_trajectory(traj, w);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      EXPECT_LT(translation_error(s.pose(i), traj.pose(i)), 1e-12);
      EXPECT_LT(rotation_error_deg(s.pose(i), traj.pose(i)), 1e-9);
    }
  }
}

TEST(TrackFit, MovingAverageWindowErrors) {
  const PoseTrajectory t = PoseTrajectory::from_poses({Pose(), Pose()}, 1.0);
  try {
    smooth_trajectory(t, 4);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEvenWindow);
  }
  EXPECT_THROW(smooth_trajectory(t, 0), Error);
}
