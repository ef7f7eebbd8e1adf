// poseloop command-line front end. Every subcommand reads files, calls one
// library stage and writes its result to --out (stdout when omitted).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "poseloop/bench.hpp"
#include "poseloop/depthfit.hpp"
#include "poseloop/error.hpp"
#include "poseloop/execsim.hpp"
#include "poseloop/filtergate.hpp"
#include "poseloop/io.hpp"
#include "poseloop/retarget.hpp"
#include "poseloop/trackfit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace poseloop;

namespace {

struct Common {
  std::string out;
  std::string format = "jsonl";
  std::string config;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("--out", c.out, "Output path (default: stdout)");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--config", c.config, "JSON config file");
  if (with_format) {
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"jsonl", "csv"}));
  }
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    io::write_text(c.out, text);
  }
}

json config_or_empty(const Common& c) {
  return c.config.empty() ? json::object() : io::read_json(c.config);
}

std::string csv_line(std::initializer_list<std::string> fields) {
  std::string s;
  for (const std::string& f : fields) s += (s.empty() ? "" : ",") + f;
  return s + "\n";
}

std::string num(double v) { return json(v).dump(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-centric trajectory tools: depth alignment, tracking, retargeting, "
               "closed-loop execution and evaluation"};
  app.require_subcommand(1);
  Common c;

  // align-depth
  std::string pred_path, real_path, mask_path, aligned_out;
  int dilation = 10;
  bool trimmed = false;
  auto* align = app.add_subcommand("align-depth", "Fit real = s * pred + b over a dilated mask");
  align->add_option("--pred", pred_path, "Predicted depth (DPTH)")->required();
  align->add_option("--real", real_path, "Sensor depth (DPTH)")->required();
  align->add_option("--mask", mask_path, "Object mask (PGM)")->required();
  align->add_option("--dilation", dilation, "Dilation radius in pixels");
  align->add_flag("--trimmed", trimmed, "Refit after dropping MAD outliers");
  align->add_option("--aligned", aligned_out, "Write the aligned predicted depth (DPTH)");
  add_common(align, c);

  // pnp-track
  std::string tracks_path, depth0_path, intrinsics_path, flags_out;
  double fps = 15.0, threshold = 3.0;
  int iterations = 200;
  std::size_t min_inliers = 0;
  bool no_ransac = false;
  auto* track = app.add_subcommand("pnp-track", "Relative object motion from point tracks");
  track->add_option("--tracks", tracks_path, "Tracks (JSON)")->required();
  track->add_option("--depth0", depth0_path, "Frame-0 metric depth (DPTH)")->required();
  track->add_option("--intrinsics", intrinsics_path, "Camera intrinsics (JSON)")->required();
  track->add_option("--fps", fps, "Frame rate");
  track->add_option("--threshold", threshold, "RANSAC inlier threshold (px)");
  track->add_option("--iterations", iterations, "RANSAC iterations");
  track->add_option("--min-inliers", min_inliers, "Minimum consensus size");
  track->add_flag("--no-ransac", no_ransac, "Refine on all correspondences");
  track->add_option("--flags-out", flags_out, "Per-frame status (JSONL)");
  add_common(track, c);

  // smooth
  std::string in_path;
  int window = 5;
  auto* smooth = app.add_subcommand("smooth", "Centered moving-average smoothing");
  smooth->add_option("--in", in_path, "Trajectory (JSONL)")->required();
  smooth->add_option("--window", window, "Odd window length");
  add_common(smooth, c);

  // retarget
  std::string grasp_path;
  auto* retarget = app.add_subcommand("retarget", "Object trajectory to end-effector trajectory");
  retarget->add_option("--in", in_path, "Object trajectory (JSONL)")->required();
  retarget->add_option("--grasp", grasp_path, "Grasp offset (one JSONL record)")->required();
  add_common(retarget, c);

  // simulate
  std::string perturb_path;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop execution against the simulator");
  simulate->add_option("--plan", in_path, "End-effector trajectory (JSONL)")->required();
  simulate->add_option("--grasp", grasp_path, "Grasp offset (one JSONL record)")->required();
  simulate->add_option("--perturbations", perturb_path, "Perturbation script (JSONL)");
  add_common(simulate, c);

  // jitter
  double sigma = 2.0;
  auto* jitter = app.add_subcommand("jitter", "Translational and rotational RMS jitter");
  jitter->add_option("--in", in_path, "Trajectory (JSONL)")->required();
  jitter->add_option("--sigma", sigma, "Gaussian sigma in frames");
  add_common(jitter, c);

  // filter-stats
  int group_levels = 1;
  auto* fstats = app.add_subcommand("filter-stats", "Pass rates and judge/human correlation");
  fstats->add_option("--in", in_path, "Verdict log (JSONL)")->required();
  fstats->add_option("--group-levels", group_levels, "Video id prefix depth used as group");
  add_common(fstats, c);

  // suite / report
  std::string plot_out;
  auto* suite = app.add_subcommand("suite", "Run a scenario suite");
  suite->add_option("--plot", plot_out, "Also write plot data (CSV)");
  add_common(suite, c, false);
  auto* report = app.add_subcommand("report", "Plot-data table from a suite report");
  report->add_option("--in", in_path, "Suite report (JSON)")->required();
  add_common(report, c, false);

  // synth
  std::string task_name = "pour", out_dir;
  double outliers = 0.0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic task as input files");
  synth->add_option("--task", task_name, "pour | lift | place | sweep");
  synth->add_option("--dir", out_dir, "Output directory")->required();
  synth->add_option("--outliers", outliers, "Fraction of outlier observations");
  add_common(synth, c, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*align) {
      const json cfg = config_or_empty(c);
      DepthFitOptions opts;
      opts.dilation_px = cfg.value("dilation_px", dilation);
      opts.trimmed = cfg.value("trimmed", trimmed);
      opts.mad_factor = cfg.value("mad_factor", opts.mad_factor);
      const DepthMap pred = io::read_depth(pred_path);
      const AffineDepthFit fit =
          fit_scale_shift(pred, io::read_depth(real_path), io::read_mask(mask_path), opts);
      if (!aligned_out.empty()) io::write_depth(aligned_out, apply_affine(pred, fit).depth);
      if (c.format == "csv") {
        emit(c, "scale,shift,rmse,pixel_count\n" +
                    csv_line({num(fit.scale), num(fit.shift), num(fit.rmse),
                              std::to_string(fit.pixel_count)}));
      } else {
        emit(c, ojson{{"scale", fit.scale}, {"shift", fit.shift}, {"rmse", fit.rmse},
                     {"pixel_count", fit.pixel_count}}.dump() + "\n");
      }
    } else if (*track) {
      const json cfg = config_or_empty(c);
      TrackingConfig tc;
      tc.fps = cfg.value("fps", fps);
      tc.use_ransac = !cfg.value("no_ransac", no_ransac);
      tc.ransac.iterations = cfg.value("iterations", iterations);
      tc.ransac.threshold_px = cfg.value("threshold_px", threshold);
      tc.ransac.min_inliers = cfg.value("min_inliers", min_inliers);
      tc.ransac.seed = c.seed;
      const CameraIntrinsics K = io::intrinsics_from_json(io::read_json(intrinsics_path));
      const TrackingResult r = track_trajectory(io::tracks_from_json(io::read_json(tracks_path)),
                                                io::read_depth(depth0_path), K, tc);
      emit(c, c.format == "csv" ? io::trajectory_to_csv(r.trajectory)
                                : io::trajectory_to_jsonl(r.trajectory));
      if (!flags_out.empty()) {
        std::string lines;
        for (std::size_t f = 0; f < r.status.size(); ++f) {
          lines += ojson{{"frame", f},
                        {"status", r.status[f] == FrameStatus::kEstimated ? "estimated"
                                                                          : "carried_forward"},
                        {"correspondences", r.correspondences[f]},
                        {"inliers", r.inliers[f]}}.dump() + "\n";
        }
        io::write_text(flags_out, lines);
      }
      std::cerr << "carried forward: " << r.carried_forward_count() << " of " << r.status.size()
                << " frames\n";
    } else if (*smooth) {
      const int w = config_or_empty(c).value("window", window);
      const PoseTrajectory s = smooth_trajectory(io::trajectory_from_jsonl(io::read_text(in_path)), w);
      emit(c, c.format == "csv" ? io::trajectory_to_csv(s) : io::trajectory_to_jsonl(s));
    } else if (*retarget) {
      const EndEffectorTrajectory ee =
          retarget_trajectory(io::trajectory_from_jsonl(io::read_text(in_path)),
                              io::grasp_from_line(io::read_text(grasp_path)));
      emit(c, c.format == "csv" ? io::trajectory_to_csv(ee.poses)
                                : io::trajectory_to_jsonl(ee.poses));
    } else if (*simulate) {
      const json cfg = config_or_empty(c);
      DeviationPolicy policy;
      policy.max_translation = cfg.value("max_translation", policy.max_translation);
      policy.max_rotation_deg = cfg.value("max_rotation_deg", policy.max_rotation_deg);
      policy.settle_translation = cfg.value("settle_translation", policy.settle_translation);
      policy.settle_rotation_deg = cfg.value("settle_rotation_deg", policy.settle_rotation_deg);
      policy.max_backtracks = cfg.value("max_backtracks", policy.max_backtracks);
      policy.tick_budget = cfg.value("tick_budget", policy.tick_budget);
      policy.realign_on_backtrack = cfg.value("realign_on_backtrack", policy.realign_on_backtrack);
      const EndEffectorTrajectory plan{io::trajectory_from_jsonl(io::read_text(in_path))};
      const GraspTransform g = io::grasp_from_line(io::read_text(grasp_path));
      std::vector<Perturbation> script;
      if (!perturb_path.empty()) script = io::perturbations_from_jsonl(io::read_text(perturb_path));
      SimState sim = SimState::at(plan.pose(0), g, c.seed);
      sim.max_linear_speed = cfg.value("max_linear_speed", sim.max_linear_speed);
      sim.max_angular_speed_deg = cfg.value("max_angular_speed_deg", sim.max_angular_speed_deg);
      const ExecutionLog log = execute(plan, g, policy, sim, script);
      emit(c, c.format == "csv" ? io::execution_log_to_csv(log) : io::execution_log_to_jsonl(log));
      std::cerr << execution_status_name(log.summary.status) << ", " << log.summary.backtracks
                << " backtracks, " << log.summary.ticks << " ticks\n";
      return log.summary.completed ? 0 : 3;
    } else if (*jitter) {
      const JitterReport r = rms_jitter(io::trajectory_from_jsonl(io::read_text(in_path)), sigma);
      if (c.format == "csv") {
        emit(c, "translation,rotation_deg,sigma,samples\n" +
                    csv_line({num(r.translation), num(r.rotation_deg), num(r.sigma),
                              std::to_string(r.samples)}));
      } else {
        emit(c, ojson{{"translation", r.translation}, {"rotation_deg", r.rotation_deg},
                     {"sigma", r.sigma}, {"samples", r.samples}}.dump() + "\n");
      }
    } else if (*fstats) {
      const std::vector<Verdict> verdicts = io::verdicts_from_jsonl(io::read_text(in_path));
      const std::vector<PassRate> rates = pass_rate(verdicts, group_by_video_prefix(group_levels));
      std::optional<double> corr;
      try {
        corr = judge_human_correlation(verdicts);
      } catch (const Error& e) {
        std::cerr << "correlation unavailable: " << e.what() << "\n";
      }
      std::string text;
      if (c.format == "csv") {
        text = "group,passes,total,rate\n";
        for (const PassRate& r : rates) {
          text += csv_line({r.group, std::to_string(r.passes), std::to_string(r.total), num(r.rate)});
        }
      } else {
        for (const PassRate& r : rates) {
          text += ojson{{"group", r.group}, {"passes", r.passes}, {"total", r.total},
                       {"rate", r.rate}}.dump() + "\n";
        }
        text += ojson{{"judge_human_pearson", corr ? ojson(*corr) : ojson(nullptr)}}.dump() + "\n";
      }
      emit(c, text);
    } else if (*suite) {
      if (c.config.empty()) throw Error(Errc::kConfig, "suite needs --config");
      const SuiteReport r = run_suite(parse_suite_config(io::read_json(c.config)));
      emit(c, report_to_json(r).dump(2) + "\n");
      if (!plot_out.empty()) io::write_text(plot_out, plot_rows_csv(plot_rows(r)));
    } else if (*report) {
      emit(c, plot_rows_csv(plot_rows(io::read_json(in_path))));
    } else if (*synth) {
      SyntheticTaskOptions opts;
      opts.outlier_fraction = outliers;
      const SyntheticTask t = gen_synthetic_task(parse_task_kind(task_name), c.seed, opts);
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      io::write_text(dir / "intrinsics.json", io::intrinsics_to_json(t.K).dump(2) + "\n");
      io::write_depth(dir / "depth0.dpth", t.depth0);
      io::write_mask(dir / "mask0.pgm", t.mask0);
      io::write_text(dir / "tracks.json", io::tracks_to_json(t.tracks).dump() + "\n");
      io::write_text(dir / "object.jsonl", io::trajectory_to_jsonl(t.object_trajectory));
      io::write_text(dir / "relative.jsonl", io::trajectory_to_jsonl(t.relative_trajectory()));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
