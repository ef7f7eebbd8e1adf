#include "poseloop/bench.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

#include "poseloop/error.hpp"
#include "poseloop/io.hpp"

namespace poseloop {

using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

int kernel_radius(double sigma) { return static_cast<int>(std::floor(3.0 * sigma)); }

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(Errc::kInvalidArgument, "sigma must be positive");
  }
  const int r = kernel_radius(sigma);
  std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    const double v = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    w[static_cast<std::size_t>(k + r)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

PoseTrajectory gaussian_smooth_traj(const PoseTrajectory& traj, double sigma) {
  const std::vector<double> kernel = gaussian_kernel(sigma);
  if (traj.size() < 3) throw Error(Errc::kTooShort, "need at least 3 samples");
  const int r = kernel_radius(sigma);
  const auto n = static_cast<int>(traj.size());
  const std::vector<Quat> aligned = hemisphere_aligned(traj);

  std::vector<Pose> out;
  out.reserve(traj.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - r);
    const int hi = std::min(n - 1, i + r);
    const Quat& center = aligned[static_cast<std::size_t>(i)];

    double wsum = 0.0;
    Vec3 t = Vec3::Zero();
    Eigen::Vector4d qsum = Eigen::Vector4d::Zero();
    for (int j = lo; j <= hi; ++j) {
      const double w = kernel[static_cast<std::size_t>(j - i + r)];
      const auto js = static_cast<std::size_t>(j);
      Quat q = aligned[js];
      if (q.dot(center) < 0.0) q.coeffs() = -q.coeffs();
      wsum += w;
      t += w * traj.pose(js).translation();
      qsum += w * q.coeffs();
    }
    Quat mean;
    mean.coeffs() = qsum.normalized();

    Vec3 v = Vec3::Zero();
    for (int j = lo; j <= hi; ++j) {
      const double w = kernel[static_cast<std::size_t>(j - i + r)];
      v += w * quat_to_rotvec(mean.conjugate() * aligned[static_cast<std::size_t>(j)]);
    }
    out.emplace_back(t / wsum, mean * rotvec_to_quat(v / wsum));
  }
  return traj.with_poses(out);
}

JitterReport rms_jitter(const PoseTrajectory& traj, double sigma) {
  const PoseTrajectory smooth = gaussian_smooth_traj(traj, sigma);
  double st = 0.0;
  double sr = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    st += (traj.pose(i).translation() - smooth.pose(i).translation()).squaredNorm();
    const double theta = rotation_angle(smooth.pose(i).rotation(), traj.pose(i).rotation());
    sr += theta * theta;
  }
  const auto n = static_cast<double>(traj.size());
  return {std::sqrt(st / n), std::sqrt(sr / n), sigma, traj.size()};
}

bool judge_success(const ExecutionLog& log, const SuccessCriterion& crit) {
  if (log.records.empty()) return false;
  const Deviation d = deviation(log.final_observed_object(), crit.target);
  return d.translation <= crit.translation && d.rotation_deg <= crit.rotation_deg;
}

// ---------------------------------------------------------------------------
// Config

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(Errc::kConfig, path + ": " + what);
}

// Reads typed fields from one JSON object and rejects unknown keys.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_, "expected an object");
  }

  std::string at(std::string_view key) const { return path_ + "." + std::string(key); }
  bool has(std::string_view key) {
    seen_.emplace_back(key);
    return j_.contains(key);
  }
  const json& raw(std::string_view key) {
    if (!has(key)) config_error(at(key), "missing");
    return j_.at(key);
  }

  double number(std::string_view key, double fallback, bool positive = false) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) config_error(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d) || d < 0.0 || (positive && d == 0.0)) {
      config_error(at(key), positive ? "must be positive" : "must be non-negative");
    }
    return d;
  }

  long integer(std::string_view key, long fallback, long min_value) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) config_error(at(key), "expected an integer");
    const long x = v.get<long>();
    if (x < min_value) config_error(at(key), "must be >= " + std::to_string(min_value));
    return x;
  }

  bool boolean(std::string_view key, bool fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) config_error(at(key), "expected a boolean");
    return j_.at(key).get<bool>();
  }

  std::string string(std::string_view key) {
    const json& v = raw(key);
    if (!v.is_string()) config_error(at(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        config_error(at(k), "unknown field");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

std::vector<std::uint64_t> parse_seeds(const json& j, const std::string& path) {
  std::vector<std::uint64_t> seeds;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number_integer() || j[i].get<std::int64_t>() < 0) {
        config_error(path + "[" + std::to_string(i) + "]", "expected a non-negative integer");
      }
      seeds.push_back(j[i].get<std::uint64_t>());
    }
  } else {
    Fields f(j, path);
    const auto start = static_cast<std::uint64_t>(f.integer("start", 0, 0));
    const long count = f.integer("count", 0, 1);
    if (!f.has("count")) config_error(f.at("count"), "missing");
    f.finish();
    for (long i = 0; i < count; ++i) seeds.push_back(start + static_cast<std::uint64_t>(i));
  }
  if (seeds.empty()) config_error(path, "no seeds");
  return seeds;
}

SuiteCell parse_cell(const json& j, const std::string& path) {
  Fields f(j, path);
  SuiteCell c;
  c.name = f.string("name");
  try {
    c.task = parse_task_kind(f.string("task"));
  } catch (const Error&) {
    config_error(f.at("task"), "unknown task kind");
  }
  try {
    c.variant = f.has("variant") ? parse_variant(f.string("variant")) : PipelineVariant::kOraclePose;
  } catch (const Error&) {
    config_error(f.at("variant"), "expected \"oracle-pose\" or \"pnp-track\"");
  }
  c.seeds = parse_seeds(f.raw("seeds"), f.at("seeds"));

  SyntheticTaskOptions& o = c.task_options;
  o.frames = static_cast<int>(f.integer("frames", o.frames, 3));
  o.fps = f.number("fps", o.fps, true);
  o.track_count = static_cast<int>(f.integer("track_count", o.track_count, 4));
  o.outlier_fraction = f.number("outlier_fraction", o.outlier_fraction);
  if (o.outlier_fraction >= 1.0) config_error(f.at("outlier_fraction"), "must be < 1");
  if (f.has("occlusion_fraction")) {
    o.occlusion_fraction = f.number("occlusion_fraction", 0.0);
    if (*o.occlusion_fraction > 1.0) config_error(f.at("occlusion_fraction"), "must be <= 1");
  }
  if (f.has("occlusion_keep")) o.occlusion_keep = static_cast<int>(f.integer("occlusion_keep", 0, 0));
  c.tracking.fps = o.fps;

  c.smoothing_window = static_cast<int>(f.integer("smoothing_window", c.smoothing_window, 1));
  if (c.smoothing_window % 2 == 0) config_error(f.at("smoothing_window"), "must be odd");

  if (f.has("observation_noise")) {
    Fields n(f.raw("observation_noise"), f.at("observation_noise"));
    c.observation_noise_translation = n.number("translation", 0.0);
    c.observation_noise_rotation_deg = n.number("rotation_deg", 0.0);
    n.finish();
  }
  if (f.has("perturbations")) {
    const json& arr = f.raw("perturbations");
    if (!arr.is_array()) config_error(f.at("perturbations"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = f.at("perturbations") + "[" + std::to_string(i) + "]";
      try {
        c.perturbations.push_back(io::perturbation_from_json(arr[i]));
        c.perturbations.back().validate(static_cast<std::size_t>(o.frames));
      } catch (const Error& e) {
        config_error(p, e.what());
      }
    }
  }
  if (f.has("success")) {
    Fields s(f.raw("success"), f.at("success"));
    c.success_translation = s.number("translation", c.success_translation, true);
    c.success_rotation_deg = s.number("rotation_deg", c.success_rotation_deg, true);
    s.finish();
  }
  if (f.has("policy")) {
    Fields p(f.raw("policy"), f.at("policy"));
    DeviationPolicy& d = c.policy;
    d.max_translation = p.number("max_translation", d.max_translation, true);
    d.max_rotation_deg = p.number("max_rotation_deg", d.max_rotation_deg, true);
    d.settle_translation = p.number("settle_translation", d.settle_translation, true);
    d.settle_rotation_deg = p.number("settle_rotation_deg", d.settle_rotation_deg, true);
    d.max_backtracks = static_cast<int>(p.integer("max_backtracks", d.max_backtracks, 0));
    d.tick_budget = p.integer("tick_budget", d.tick_budget, 1);
    d.realign_on_backtrack = p.boolean("realign_on_backtrack", d.realign_on_backtrack);
    p.finish();
    try {
      d.validate();
    } catch (const Error& e) {
      config_error(f.at("policy"), e.what());
    }
  }
  if (f.has("ransac")) {
    Fields r(f.raw("ransac"), f.at("ransac"));
    RansacConfig& rc = c.tracking.ransac;
    rc.iterations = static_cast<int>(r.integer("iterations", rc.iterations, 1));
    rc.threshold_px = r.number("threshold_px", rc.threshold_px, true);
    rc.min_inliers = static_cast<std::size_t>(r.integer("min_inliers", 0, 0));
    c.tracking.use_ransac = r.boolean("enabled", true);
    r.finish();
  }
  f.finish();
  return c;
}

}  // namespace

SuiteConfig parse_suite_config(const json& j) {
  Fields f(j, "$");
  SuiteConfig cfg;
  const long version = f.integer("schema_version", -1, 0);
  if (version == -1) config_error(f.at("schema_version"), "missing");
  if (version != kSuiteSchemaVersion) {
    config_error(f.at("schema_version"), "unsupported version " + std::to_string(version));
  }
  cfg.schema_version = static_cast<int>(version);
  cfg.name = f.has("name") ? f.string("name") : std::string("suite");
  const json& cells = f.raw("cells");
  if (!cells.is_array() || cells.empty()) config_error(f.at("cells"), "expected a non-empty array");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cfg.cells.push_back(parse_cell(cells[i], f.at("cells") + "[" + std::to_string(i) + "]"));
    for (std::size_t k = 0; k < i; ++k) {
      if (cfg.cells[k].name == cfg.cells[i].name) {
        config_error(f.at("cells") + "[" + std::to_string(i) + "].name", "duplicate cell name");
      }
    }
  }
  f.finish();
  return cfg;
}

// ---------------------------------------------------------------------------
// Runner

std::size_t CellReport::successes() const {
  return static_cast<std::size_t>(
      std::count_if(episodes.begin(), episodes.end(), [](const EpisodeResult& e) { return e.success; }));
}

double CellReport::success_rate() const {
  return episodes.empty() ? 0.0
                          : static_cast<double>(successes()) / static_cast<double>(episodes.size());
}

int CellReport::total_backtracks() const {
  int n = 0;
  for (const EpisodeResult& e : episodes) n += e.backtracks;
  return n;
}

std::size_t CellReport::carried_forward_frames() const {
  std::size_t n = 0;
  for (const EpisodeResult& e : episodes) n += e.carried_forward;
  return n;
}

namespace {

// Object about 10 cm ahead of the flange with a small random tilt.
GraspTransform random_grasp(std::uint64_t seed, double grasp_time) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 t(0.01 * u(rng), 0.01 * u(rng), 0.10 + 0.02 * u(rng));
  const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
  const Quat q = rotvec_to_quat(axis * (15.0 * u(rng) / kRadToDeg));
  return GraspTransform::from_offset(Pose(t, q), grasp_time);
}

}  // namespace

EpisodeResult run_episode(const SuiteCell& cell, std::uint64_t seed) {
  const SyntheticTask task = gen_synthetic_task(cell.task, seed, cell.task_options);
  const PoseTrajectory& truth = task.object_trajectory;

  EpisodeResult r;
  r.seed = seed;
  PoseTrajectory estimate = truth;
  if (cell.variant == PipelineVariant::kPnpTrack) {
    TrackingConfig tc = cell.tracking;
    tc.ransac.seed = seed;
    const TrackingResult tr = track_trajectory(task.tracks, task.depth0, task.K, tc);
    std::vector<Pose> poses;
    for (std::size_t i = 0; i < tr.trajectory.size(); ++i) {
      poses.push_back(compose(tr.trajectory.pose(i), truth.pose(0)));
      const double err = (poses.back().translation() - truth.pose(i).translation()).norm();
      r.max_tracking_error = std::max(r.max_tracking_error, err);
    }
    estimate = truth.with_poses(poses);
    r.carried_forward = tr.carried_forward_count();
  }
  r.jitter = rms_jitter(estimate);

  const PoseTrajectory plan_source = smooth_trajectory(estimate, cell.smoothing_window);
  const GraspTransform g = random_grasp(seed, plan_source.time(0));
  const EndEffectorTrajectory plan = retarget_trajectory(plan_source, g);

  SimState sim = SimState::at(plan.pose(0), g, seed);
  sim.noise_translation = cell.observation_noise_translation;
  sim.noise_rotation_deg = cell.observation_noise_rotation_deg;
  const ExecutionLog log = execute(plan, g, cell.policy, sim, cell.perturbations);

  r.status = log.summary.status;
  r.backtracks = log.summary.backtracks;
  r.ticks = log.summary.ticks;
  r.final_deviation = log.summary.final_deviation;
  r.success = log.summary.completed &&
              judge_success(log, {truth.pose(truth.size() - 1), cell.success_translation,
                                  cell.success_rotation_deg});
  return r;
}

SuiteReport run_suite(const SuiteConfig& config) {
  // Cells run concurrently; the report is assembled in config order.
  std::vector<std::future<CellReport>> jobs;
  for (const SuiteCell& cell : config.cells) {
    jobs.push_back(std::async(std::launch::async, [&cell] {
      CellReport rep{cell.name, cell.task, cell.variant, {}};
      for (std::uint64_t s : cell.seeds) rep.episodes.push_back(run_episode(cell, s));
      return rep;
    }));
  }
  SuiteReport report{config.name, {}};
  for (auto& j : jobs) report.cells.push_back(j.get());
  return report;
}

namespace {

struct CellStats {
  double jitter_translation_mean = 0.0;
  double jitter_rotation_deg_mean = 0.0;
  double max_tracking_error = 0.0;
  double mean_backtracks = 0.0;
};

CellStats cell_stats(const CellReport& c) {
  CellStats s;
  if (c.episodes.empty()) return s;
  for (const EpisodeResult& e : c.episodes) {
    s.jitter_translation_mean += e.jitter.translation;
    s.jitter_rotation_deg_mean += e.jitter.rotation_deg;
    s.max_tracking_error = std::max(s.max_tracking_error, e.max_tracking_error);
  }
  const auto n = static_cast<double>(c.episodes.size());
  s.jitter_translation_mean /= n;
  s.jitter_rotation_deg_mean /= n;
  s.mean_backtracks = c.total_backtracks() / n;
  return s;
}

}  // namespace

nlohmann::ordered_json report_to_json(const SuiteReport& report) {
  using ojson = nlohmann::ordered_json;
  ojson cells = ojson::array();
  for (const CellReport& c : report.cells) {
    const CellStats s = cell_stats(c);
    ojson episodes = ojson::array();
    for (const EpisodeResult& e : c.episodes) {
      episodes.push_back(ojson{
          {"seed", e.seed},
          {"success", e.success},
          {"status", std::string(execution_status_name(e.status))},
          {"backtracks", e.backtracks},
          {"ticks", e.ticks},
          {"final_deviation",
           {{"translation", e.final_deviation.translation},
            {"rotation_deg", e.final_deviation.rotation_deg}}},
          {"carried_forward", e.carried_forward},
          {"max_tracking_error", e.max_tracking_error},
          {"jitter", {{"translation", e.jitter.translation}, {"rotation_deg", e.jitter.rotation_deg}}},
      });
    }
    cells.push_back(ojson{
        {"name", c.name},
        {"task", std::string(task_kind_name(c.task))},
        {"variant", std::string(variant_name(c.variant))},
        {"episodes", c.episodes.size()},
        {"successes", c.successes()},
        {"success_rate", c.success_rate()},
        {"backtracks", c.total_backtracks()},
        {"mean_backtracks", s.mean_backtracks},
        {"carried_forward_frames", c.carried_forward_frames()},
        {"max_tracking_error", s.max_tracking_error},
        {"jitter_translation_mean", s.jitter_translation_mean},
        {"jitter_rotation_deg_mean", s.jitter_rotation_deg_mean},
        {"results", std::move(episodes)},
    });
  }
  return ojson{{"schema_version", kSuiteSchemaVersion},
               {"suite", report.name},
               {"cells", std::move(cells)}};
}

namespace {

constexpr const char* kPlotMetrics[] = {
    "success_rate",           "mean_backtracks",          "carried_forward_frames",
    "max_tracking_error",     "jitter_translation_mean",  "jitter_rotation_deg_mean",
};

}  // namespace

std::vector<PlotRow> plot_rows(const SuiteReport& report) {
  return plot_rows(json::parse(report_to_json(report).dump()));
}

std::vector<PlotRow> plot_rows(const json& report) {
  std::vector<PlotRow> rows;
  try {
    for (const json& c : report.at("cells")) {
      for (const char* m : kPlotMetrics) {
        rows.push_back({c.at("name").get<std::string>(), m, c.at(m).get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, std::string("report: ") + e.what());
  }
  return rows;
}

std::string plot_rows_csv(const std::vector<PlotRow>& rows) {
  std::string out = "cell,metric,value\n";
  for (const PlotRow& r : rows) {
    // Cell names are free text; quote them when they would break the row.
    std::string cell = r.cell;
    if (cell.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char ch : cell) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      cell = q + "\"";
    }
    out += cell + "," + r.metric + "," + json(r.value).dump() + "\n";
  }
  return out;
}

std::string_view variant_name(PipelineVariant v) {
  return v == PipelineVariant::kOraclePose ? "oracle-pose" : "pnp-track";
}

PipelineVariant parse_variant(std::string_view name) {
  if (name == "oracle-pose") return PipelineVariant::kOraclePose;
  if (name == "pnp-track") return PipelineVariant::kPnpTrack;
  throw Error(Errc::kInvalidArgument, "unknown pipeline variant: " + std::string(name));
}

}  // namespace poseloop
