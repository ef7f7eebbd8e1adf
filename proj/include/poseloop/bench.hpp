#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poseloop/execsim.hpp"
#include "poseloop/trajectory.hpp"

namespace poseloop {

struct JitterReport {
  double translation = 0.0;   // meters, RMS
  double rotation_deg = 0.0;  // degrees, RMS
  double sigma = 2.0;         // frames
  std::size_t samples = 0;
};

// Kernel radius floor(3 sigma); weights exp(-k^2 / (2 sigma^2)).
std::vector<double> gaussian_kernel(double sigma);

// Gaussian smoothing with boundary renormalization. Rotations are averaged
// in the tangent space at the normalized weighted quaternion mean of each
// sample's neighborhood. Throws kTooShort (< 3 samples), kInvalidArgument.
PoseTrajectory gaussian_smooth_traj(const PoseTrajectory& traj, double sigma = 2.0);

// RMS of the residual between a trajectory and its Gaussian-smoothed copy.
JitterReport rms_jitter(const PoseTrajectory& traj, double sigma = 2.0);

struct SuccessCriterion {
  Pose target;
  double translation = 0.02;  // meters
  double rotation_deg = 10.0;
};

// True iff the log's final observed object pose lies inside the region.
bool judge_success(const ExecutionLog& log, const SuccessCriterion& crit);

// ---------------------------------------------------------------------------
// Scenario suite

enum class PipelineVariant { kOraclePose, kPnpTrack };

struct SuiteCell {
  std::string name;
  TaskKind task = TaskKind::kPour;
  PipelineVariant variant = PipelineVariant::kOraclePose;
  std::vector<std::uint64_t> seeds;
  SyntheticTaskOptions task_options;
  int smoothing_window = 5;
  double observation_noise_translation = 0.0;
  double observation_noise_rotation_deg = 0.0;
  std::vector<Perturbation> perturbations;
  DeviationPolicy policy;
  double success_translation = 0.02;
  double success_rotation_deg = 10.0;
  TrackingConfig tracking;
};

struct SuiteConfig {
  int schema_version = 1;
  std::string name;
  std::vector<SuiteCell> cells;
};

inline constexpr int kSuiteSchemaVersion = 1;

// Throws kConfig with a JSON path in the message.
SuiteConfig parse_suite_config(const nlohmann::json& j);

struct EpisodeResult {
  std::uint64_t seed = 0;
  bool success = false;
  ExecutionStatus status = ExecutionStatus::kBudgetExhausted;
  int backtracks = 0;
  long ticks = 0;
  Deviation final_deviation;
  std::size_t carried_forward = 0;
  double max_tracking_error = 0.0;  // meters, estimated vs true object position
  JitterReport jitter;              // of the raw estimated trajectory
};

struct CellReport {
  std::string name;
  TaskKind task = TaskKind::kPour;
  PipelineVariant variant = PipelineVariant::kOraclePose;
  std::vector<EpisodeResult> episodes;

  std::size_t successes() const;
  double success_rate() const;
  int total_backtracks() const;
  std::size_t carried_forward_frames() const;
};

struct SuiteReport {
  std::string name;
  std::vector<CellReport> cells;
};

EpisodeResult run_episode(const SuiteCell& cell, std::uint64_t seed);
SuiteReport run_suite(const SuiteConfig& config);

nlohmann::ordered_json report_to_json(const SuiteReport& report);

struct PlotRow {
  std::string cell;
  std::string metric;
  double value = 0.0;
};

std::vector<PlotRow> plot_rows(const SuiteReport& report);
// Rebuilds the table from an emitted report.
std::vector<PlotRow> plot_rows(const nlohmann::json& report);
std::string plot_rows_csv(const std::vector<PlotRow>& rows);

std::string_view variant_name(PipelineVariant v);
PipelineVariant parse_variant(std::string_view name);

}  // namespace poseloop
