#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "poseloop/bench.hpp"
#include "poseloop/error.hpp"
#include "support.hpp"

using namespace poseloop;
using namespace poseloop::testing;
using nlohmann::json;

namespace {

PoseTrajectory along_x(const std::vector<double>& xs) {
  std::vector<Pose> poses;
  for (double x : xs) poses.push_back(Pose::from_translation(x, 0, 0));
  return PoseTrajectory::from_poses(poses, 15.0);
}

// Truncated, boundary-renormalized Gaussian filter on scalars.
std::vector<double> smooth_scalar(const std::vector<double>& x, double sigma) {
  const int r = static_cast<int>(std::floor(3 * sigma));
  const int n = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    double num = 0, den = 0;
    for (int j = std::max(0, i - r); j <= std::min(n - 1, i + r); ++j) {
      const double w = std::exp(-(j - i) * (j - i) / (2 * sigma * sigma));
      num += w * x[static_cast<std::size_t>(j)];
      den += w;
    }
    out[static_cast<std::size_t>(i)] = num / den;
  }
  return out;
}

json minimal_cell() {
  return {{"name", "c"}, {"task", "pour"}, {"seeds", {1, 2}}};
}

std::string config_error(const json& j) {
  try {
    parse_suite_config(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kConfig);
    return e.what();
  }
  ADD_FAILURE() << "config accepted: " << j.dump();
  return "";
}

}  // namespace

TEST(Jitter, KernelShape) {
  const std::vector<double> k = gaussian_kernel(2.0);
  ASSERT_EQ(k.size(), 13u);
  double sum = 0;
  for (double v : k) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_EQ(k[0], k[12]);
  EXPECT_NEAR(k[6] / k[7], std::exp(1.0 / 8.0), 1e-14);
  EXPECT_EQ(gaussian_kernel(0.5).size(), 3u);
  EXPECT_THROW(gaussian_kernel(0.0), Error);
}

TEST(Jitter, ConstantTrajectoryIsUnchanged) {
  const Pose p(Vec3(0.1, -0.2, 0.7), Quat(Eigen::AngleAxisd(1.0, Vec3(1, 2, 2).normalized())));
  const PoseTrajectory t = PoseTrajectory::from_poses(std::vector<Pose>(20, p), 15.0);
  const PoseTrajectory s = gaussian_smooth_traj(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_LT(translation_error(s.pose(i), p), 1e-15);
    EXPECT_LT(rotation_error_deg(s.pose(i), p), 1e-9);
  }
  const JitterReport r = rms_jitter(t);
  EXPECT_LT(r.translation, 1e-15);
  EXPECT_LT(r.rotation_deg, 1e-9);
  EXPECT_EQ(r.samples, 20u);
}

TEST(Jitter, ImpulseResponseIsKernel) {
  std::vector<double> xs(41, 0.0);
  xs[20] = 1.0;
  const PoseTrajectory s = gaussian_smooth_traj(along_x(xs), 2.0);
  double norm = 0;
  for (int k = -6; k <= 6; ++k) norm += std::exp(-k * k / 8.0);
  for (int i = 0; i < 41; ++i) {
    const int k = i - 20;
    const double want = std::abs(k) <= 6 ? std::exp(-k * k / 8.0) / norm : 0.0;
    EXPECT_NEAR(s.pose(static_cast<std::size_t>(i)).translation().x(), want, 1e-15) << i;
  }
}

TEST(Jitter, LinearRampInteriorPreserved) {
  std::vector<double> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(0.003 * i - 0.05);
  const PoseTrajectory s = gaussian_smooth_traj(along_x(xs), 2.0);
  for (std::size_t i = 6; i + 6 < xs.size(); ++i) {
    EXPECT_NEAR(s.pose(i).translation().x(), xs[i], 1e-9);
  }
}

TEST(Jitter, AlternatingStepsMatchDirectEvaluation) {
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(i % 2 ? 0.001 : -0.001);
  const std::vector<double> sm = smooth_scalar(xs, 2.0);
  double acc = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) acc += (xs[i] - sm[i]) * (xs[i] - sm[i]);
  const JitterReport r = rms_jitter(along_x(xs));
  EXPECT_NEAR(r.translation, std::sqrt(acc / 100.0), 1e-15);
  EXPECT_EQ(r.rotation_deg, 0.0);
}

TEST(Jitter, InvariantToRigidPrecomposition) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const PoseTrajectory t = random_walk(rng, 50, 0.004, 2.0);
    const Pose g = random_pose(rng, 180.0, 2.0);
    std::vector<Pose> moved;
    for (const TimedPose& s : t) moved.push_back(compose(g, s.pose));
    const JitterReport a = rms_jitter(t);
    const JitterReport b = rms_jitter(t.with_poses(moved));
    EXPECT_NEAR(a.translation, b.translation, 1e-9);
    EXPECT_NEAR(a.rotation_deg, b.rotation_deg, 1e-9);
  }
}

TEST(Jitter, MovingAverageNeverIncreasesJitterOnRandomWalks) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const PoseTrajectory t = random_walk(rng, 60, 0.003, 1.5);
    const JitterReport raw = rms_jitter(t);
    for (int w : {3, 5, 7, 9}) {
      const JitterReport s = rms_jitter(smooth_trajectory(t, w));
      EXPECT_LE(s.translation, raw.translation) << "trial " << trial << " w " << w;
      EXPECT_LE(s.rotation_deg, raw.rotation_deg) << "trial " << trial << " w " << w;
    }
  }
}

TEST(Jitter, TooShort) {
  try {
    rms_jitter(along_x({0, 1}));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooShort);
  }
}

TEST(Success, PoseRegion) {
  ExecutionLog log;
  EXPECT_FALSE(judge_success(log, {}));
  TickRecord r;
  r.observed_object = Pose::from_translation(0.5, 0, 0.2);
  log.records.push_back(r);
  SuccessCriterion c{Pose::from_translation(0.5, 0, 0.2), 0.02, 10.0};
  EXPECT_TRUE(judge_success(log, c));
  c.target = Pose::from_translation(0.5, 0.025, 0.2);
  EXPECT_FALSE(judge_success(log, c));
  c.target = Pose::from_axis_angle(Vec3::UnitX(), 12 * kDeg, Vec3(0.5, 0, 0.2));
  EXPECT_FALSE(judge_success(log, c));
}

TEST(SuiteConfig, ParsesDefaultsAndOverrides) {
  json cell = minimal_cell();
  cell["variant"] = "pnp-track";
  cell["seeds"] = {{"start", 10}, {"count", 3}};
  cell["outlier_fraction"] = 0.3;
  cell["policy"] = {{"max_translation", 0.04}};
  cell["perturbations"] = json::array(
      {{{"kind", "grasp_slip"}, {"trigger", {{"waypoint", 20}}}, {"magnitude", {{"p", {0.04, 0, 0}}}}}});
  const SuiteConfig cfg =
      parse_suite_config({{"schema_version", 1}, {"name", "s"}, {"cells", {cell}}});
  ASSERT_EQ(cfg.cells.size(), 1u);
  const SuiteCell& c = cfg.cells[0];
  EXPECT_EQ(c.variant, PipelineVariant::kPnpTrack);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_EQ(c.task_options.outlier_fraction, 0.3);
  EXPECT_EQ(c.policy.max_translation, 0.04);
  EXPECT_EQ(c.policy.max_rotation_deg, 20.0);
  EXPECT_EQ(c.perturbations.size(), 1u);
  EXPECT_EQ(c.smoothing_window, 5);
}

TEST(SuiteConfig, ErrorsNameTheField) {
  EXPECT_NE(config_error({{"cells", {minimal_cell()}}}).find("$.schema_version"), std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 2}, {"cells", {minimal_cell()}}}).find("unsupported"),
            std::string::npos);

  json bad = minimal_cell();
  bad["seedz"] = 1;
  EXPECT_NE(config_error({{"schema_version", 1}, {"cells", {bad}}}).find("$.cells[0].seedz"),
            std::string::npos);
  bad = minimal_cell();
  bad["task"] = "stack";
  EXPECT_NE(config_error({{"schema_version", 1}, {"cells", {bad}}}).find("$.cells[0].task"),
            std::string::npos);
  bad = minimal_cell();
  bad["smoothing_window"] = 4;
  EXPECT_NE(config_error({{"schema_version", 1}, {"cells", {bad}}}).find("smoothing_window"),
            std::string::npos);
  bad = minimal_cell();
  bad["policy"] = {{"settle_translation", 0.5}};
  EXPECT_NE(config_error({{"schema_version", 1}, {"cells", {bad}}}).find("$.cells[0].policy"),
            std::string::npos);
  bad = minimal_cell();
  bad["perturbations"] = json::array({{{"kind", "grasp_slip"}, {"trigger", {{"waypoint", 99}}},
                                       {"magnitude", json::object()}}});
  EXPECT_NE(config_error({{"schema_version", 1}, {"cells", {bad}}}).find("perturbations[0]"),
            std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 1}, {"cells", {minimal_cell(), minimal_cell()}}})
                .find("duplicate"),
            std::string::npos);
}

TEST(Suite, NoiselessOracleCellAlwaysSucceeds) {
  SuiteCell cell;
  cell.name = "oracle";
  cell.task = TaskKind::kLift;
  for (std::uint64_t s = 0; s < 10; ++s) cell.seeds.push_back(s);
  const SuiteReport r = run_suite({1, "t", {cell}});
  EXPECT_EQ(r.cells[0].successes(), 10u);
  EXPECT_EQ(r.cells[0].success_rate(), 1.0);
  EXPECT_EQ(r.cells[0].total_backtracks(), 0);
}

TEST(Suite, OcclusionHeavyCellCountsCarriedForwardFrames) {
  SuiteCell cell;
  cell.name = "place-occluded";
  cell.task = TaskKind::kPlace;
  cell.variant = PipelineVariant::kPnpTrack;
  cell.seeds = {0, 1, 2};
  cell.task_options.occlusion_fraction = 0.85;
  cell.tracking.ransac.min_inliers = 12;
  const SuiteReport r = run_suite({1, "t", {cell}});
  EXPECT_GT(r.cells[0].carried_forward_frames(), 0u);
  const auto j = report_to_json(r);
  EXPECT_EQ(j["cells"][0]["carried_forward_frames"].get<std::size_t>(),
            r.cells[0].carried_forward_frames());
}

TEST(Suite, ReportAndPlotRowsAreDeterministic) {
  const json cfg = {{"schema_version", 1},
                    {"name", "det"},
                    {"cells",
                     {{{"name", "a"}, {"task", "sweep"}, {"seeds", {3, 4}}},
                      {{"name", "b, noisy"},
                       {"task", "pour"},
                       {"variant", "pnp-track"},
                       {"seeds", {5}},
                       {"outlier_fraction", 0.2},
                       {"observation_noise", {{"translation", 0.001}}}}}}};
  const SuiteConfig c = parse_suite_config(cfg);
  const std::string a = report_to_json(run_suite(c)).dump(2);
  const std::string b = report_to_json(run_suite(c)).dump(2);
  EXPECT_EQ(a, b);

  const SuiteReport r = run_suite(c);
  const std::vector<PlotRow> direct = plot_rows(r);
  const std::vector<PlotRow> reread = plot_rows(json::parse(a));
  ASSERT_EQ(direct.size(), 12u);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(direct[i].cell, reread[i].cell);
    EXPECT_EQ(direct[i].metric, reread[i].metric);
    EXPECT_EQ(direct[i].value, reread[i].value);
  }
  const std::string csv = plot_rows_csv(direct);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "cell,metric,value");
  EXPECT_NE(csv.find("\"b, noisy\",success_rate,"), std::string::npos);
}
