#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>

#include "poseloop/error.hpp"
#include "poseloop/trackfit.hpp"

namespace poseloop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_error(const CameraIntrinsics& K, const Pose& pose, const Vec3& X, const Vec2& u) {
  const Vec3 x = pose.apply(X);
  if (!(x.z() > 0.0)) return kInf;
  const Vec2 p(K.fx * x.x() / x.z() + K.cx, K.fy * x.y() / x.z() + K.cy);
  return (p - u).squaredNorm();
}

double total_cost(const CameraIntrinsics& K, const Pose& pose, std::span<const Vec3> points,
                  std::span<const Vec2> pixels) {
  double c = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) c += squared_error(K, pose, points[i], pixels[i]);
  return c;
}

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Gauss-Newton system for a left perturbation [omega, v] of the pose.
void normal_equations(const CameraIntrinsics& K, const Pose& pose, std::span<const Vec3> points,
                      std::span<const Vec2> pixels, Mat6& H, Vec6& g) {
  H.setZero();
  g.setZero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 x = pose.apply(points[i]);
    const double iz = 1.0 / x.z();
    const Vec2 r(K.fx * x.x() * iz + K.cx - pixels[i].x(), K.fy * x.y() * iz + K.cy - pixels[i].y());
    Eigen::Matrix<double, 2, 3> dproj;
    dproj << K.fx * iz, 0.0, -K.fx * x.x() * iz * iz,
             0.0, K.fy * iz, -K.fy * x.y() * iz * iz;
    Eigen::Matrix3d skew;
    skew << 0.0, -x.z(), x.y(),
            x.z(), 0.0, -x.x(),
            -x.y(), x.x(), 0.0;
    Eigen::Matrix<double, 2, 6> J;
    J.leftCols<3>() = -dproj * skew;
    J.rightCols<3>() = dproj;
    H.noalias() += J.transpose() * J;
    g.noalias() += J.transpose() * r;
  }
}

Pose perturb(const Pose& pose, const Vec6& delta) {
  const Pose step(delta.tail<3>(), rotvec_to_quat(delta.head<3>()));
  return compose(step, pose);
}

void check_correspondences(std::span<const Vec3> points, std::span<const Vec2> pixels) {
  if (points.size() != pixels.size()) {
    throw Error(Errc::kLengthMismatch, "point and pixel counts differ");
  }
  if (points.size() < 4) {
    throw Error(Errc::kTooFewPoints,
                "PnP needs at least 4 correspondences, got " + std::to_string(points.size()));
  }
}

double mean_error(const CameraIntrinsics& K, const Pose& pose, std::span<const Vec3> points,
                  std::span<const Vec2> pixels, const std::vector<bool>& use) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!use[i]) continue;
    sum += std::sqrt(squared_error(K, pose, points[i], pixels[i]));
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

std::size_t PnPResult::inlier_count() const {
  return static_cast<std::size_t>(std::count(inliers.begin(), inliers.end(), true));
}

Pose centroid_init(std::span<const Vec3> points, std::span<const Vec2> pixels,
                   const CameraIntrinsics& K, double depth) {
  check_correspondences(points, pixels);
  Vec3 c3 = Vec3::Zero();
  Vec2 c2 = Vec2::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    c3 += points[i];
    c2 += pixels[i];
  }
  c3 /= static_cast<double>(points.size());
  c2 /= static_cast<double>(pixels.size());
  return {backproject(K, c2, depth) - c3, Quat::Identity()};
}

Pose centroid_init(std::span<const Vec3> points, std::span<const Vec2> pixels,
                   const CameraIntrinsics& K) {
  check_correspondences(points, pixels);
  const std::size_t n = points.size();
  Vec3 c3 = Vec3::Zero();
  Vec2 c2 = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    c3 += points[i];
    c2 += pixels[i];
  }
  c3 /= static_cast<double>(n);
  c2 /= static_cast<double>(n);
  double s3 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s3 += (points[i] - c3).squaredNorm();
    s2 += (pixels[i] - c2).squaredNorm();
  }
  // Depth guess from the ratio of 3D to 2D spread.
  const double f = 0.5 * (K.fx + K.fy);
  const double depth = s2 > 0.0 && s3 > 0.0 ? f * std::sqrt(s3 / s2) : 1.0;
  return centroid_init(points, pixels, K, depth);
}

PnPResult pnp_refine(std::span<const Vec3> points, std::span<const Vec2> pixels,
                     const CameraIntrinsics& K, const Pose& init, const RefineOptions& options) {
  check_correspondences(points, pixels);
  PnPResult result;
  Pose pose = init;
  double cost = total_cost(K, pose, points, pixels);
  if (!std::isfinite(cost)) {
    throw Error(Errc::kDiverged, "initial pose gives a non-finite reprojection cost");
  }
  result.accepted_costs.push_back(cost);

  double damping = options.initial_damping;
  Mat6 H;
  Vec6 g;
  normal_equations(K, pose, points, pixels, H, g);
  int it = 0;
  while (it < options.max_iterations) {
    Mat6 A = H;
    A.diagonal() += damping * (H.diagonal().array() + 1e-12).matrix();
    const Vec6 delta = -A.ldlt().solve(g);
    if (!delta.allFinite()) throw Error(Errc::kDiverged, "non-finite update step");
    if (delta.norm() < options.step_tolerance) break;
    ++it;
    const Pose candidate = perturb(pose, delta);
    const double c = total_cost(K, candidate, points, pixels);
    if (std::isfinite(c) && c < cost) {
      pose = candidate;
      cost = c;
      result.accepted_costs.push_back(cost);
      damping *= 0.1;
      normal_equations(K, pose, points, pixels, H, g);
    } else {
      damping *= 10.0;
    }
  }
  if (!std::isfinite(cost)) throw Error(Errc::kDiverged, "reprojection cost became non-finite");
  result.pose = pose;
  result.iterations = it;
  result.inliers.assign(points.size(), true);
  result.mean_reprojection_error = mean_error(K, pose, points, pixels, result.inliers);
  return result;
}

PnPResult pnp_ransac(std::span<const Vec3> points, std::span<const Vec2> pixels,
                     const CameraIntrinsics& K, const RansacConfig& cfg,
                     const std::optional<Pose>& init) {
  check_correspondences(points, pixels);
  const std::size_t n = points.size();
  const std::size_t required = std::max<std::size_t>(4, cfg.min_inliers);
  const double thresh2 = cfg.threshold_px * cfg.threshold_px;

  const Pose start = init ? *init : centroid_init(points, pixels, K);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::size_t best_count = 0;
  double best_score = kInf;
  std::optional<Pose> best_pose;
  std::vector<Vec3> sample_pts(4);
  std::vector<Vec2> sample_px(4);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    // Partial Fisher-Yates: the first 4 entries become the sample.
    for (std::size_t k = 0; k < 4; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(order[k], order[pick(rng)]);
      sample_pts[k] = points[order[k]];
      sample_px[k] = pixels[order[k]];
    }
    Pose hypothesis;
    try {
      hypothesis = pnp_refine(sample_pts, sample_px, K, start, cfg.refine).pose;
    } catch (const Error&) {
      continue;
    }
    std::size_t count = 0;
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e2 = squared_error(K, hypothesis, points[i], pixels[i]);
      if (e2 < thresh2) {
        ++count;
        score += e2;
      }
    }
    if (count > best_count || (count == best_count && count > 0 && score < best_score)) {
      best_count = count;
      best_score = score;
      best_pose = hypothesis;
      if (best_count == n) break;
    }
  }

  if (!best_pose || best_count < required) {
    throw Error(Errc::kNoConsensus, "best hypothesis has " + std::to_string(best_count) +
                                        " inliers, need " + std::to_string(required));
  }

  std::vector<Vec3> in_pts;
  std::vector<Vec2> in_px;
  for (std::size_t i = 0; i < n; ++i) {
    if (squared_error(K, *best_pose, points[i], pixels[i]) < thresh2) {
      in_pts.push_back(points[i]);
      in_px.push_back(pixels[i]);
    }
  }
  PnPResult result = pnp_refine(in_pts, in_px, K, *best_pose, cfg.refine);
  result.inliers.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    result.inliers[i] = squared_error(K, result.pose, points[i], pixels[i]) < thresh2;
  }
  if (result.inlier_count() < required) {
    throw Error(Errc::kNoConsensus, "refined pose lost consensus");
  }
  result.mean_reprojection_error = mean_error(K, result.pose, points, pixels, result.inliers);
  return result;
}

}  // namespace poseloop
