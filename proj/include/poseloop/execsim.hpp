#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poseloop/depthfit.hpp"
#include "poseloop/geom3d.hpp"
#include "poseloop/retarget.hpp"
#include "poseloop/trackfit.hpp"
#include "poseloop/trajectory.hpp"

namespace poseloop {

struct DeviationPolicy {
  double max_translation = 0.03;      // meters
  double max_rotation_deg = 20.0;
  double settle_translation = 0.005;  // meters
  double settle_rotation_deg = 2.0;
  int max_backtracks = 10;
  long tick_budget = 10000;
  // Re-capture the grasp offset from the observation when backtracking, so
  // that recovery re-aligns against a slipped object.
  bool realign_on_backtrack = true;

  // Throws kInvalidArgument.
  void validate() const;
};

struct Deviation {
  double translation = 0.0;  // meters
  double rotation_deg = 0.0;
};

Deviation deviation(const Pose& observed, const Pose& expected);
// Either threshold strictly exceeded.
bool exceeds(const Deviation& d, const DeviationPolicy& policy);

enum class PerturbationKind { kEeImpulse, kGraspSlip, kObservationNoise };
enum class TriggerKind { kTick, kWaypoint };

std::string_view perturbation_kind_name(PerturbationKind kind);
PerturbationKind parse_perturbation_kind(std::string_view name);

struct Perturbation {
  PerturbationKind kind = PerturbationKind::kEeImpulse;
  TriggerKind trigger_kind = TriggerKind::kTick;
  long trigger = 0;
  // ee_impulse: translation added in the world frame, rotation applied about
  // the end-effector origin. grasp_slip: new attach = delta * attach.
  Pose delta;
  // observation_noise: per-axis Gaussian std from the trigger onward.
  double noise_translation = 0.0;     // meters
  double noise_rotation_deg = 0.0;
  std::uint64_t seed = 0;

  // `plan_length` bounds waypoint triggers; tick triggers must be >= 0.
  void validate(std::size_t plan_length) const;
};

struct SimState {
  Pose ee_pose;
  GraspTransform attach;  // true object-in-ee offset; changes only by grasp_slip
  double max_linear_speed = 0.01;     // m / tick
  double max_angular_speed_deg = 5.0;  // deg / tick
  double noise_translation = 0.0;
  double noise_rotation_deg = 0.0;
  std::mt19937_64 rng{0};
  long tick = 0;

  static SimState at(const Pose& ee, const GraspTransform& attach, std::uint64_t seed = 0);
};

// One control tick: move toward `command` within the speed limits, apply
// `active` perturbations, and return the observed object pose.
Pose sim_step(SimState& state, const Pose& command, std::span<const Perturbation> active);

/// Owns a SimState and fires scripted perturbations when their trigger is met.
/// One-shot kinds fire once; observation noise persists once triggered.
class Simulator {
 public:
  Simulator(SimState state, std::vector<Perturbation> script);

  Pose step(const Pose& command, std::size_t waypoint);
  const SimState& state() const { return state_; }

 private:
  SimState state_;
  std::vector<Perturbation> script_;
  std::vector<bool> fired_;
};

enum class TickEvent { kAdvance, kSettle, kBacktrack };
enum class ExecutionStatus { kCompleted, kBacktrackLimit, kBudgetExhausted };

std::string_view tick_event_name(TickEvent e);
std::string_view execution_status_name(ExecutionStatus s);

struct TickRecord {
  long tick = 0;
  std::size_t waypoint = 0;  // waypoint commanded on this tick
  Pose commanded_ee;
  Pose ee;
  Pose observed_object;
  Pose expected_object;
  Deviation dev;
  TickEvent event = TickEvent::kAdvance;
  std::optional<std::size_t> backtrack_to;
};

struct ExecutionSummary {
  ExecutionStatus status = ExecutionStatus::kBudgetExhausted;
  int backtracks = 0;
  bool completed = false;
  Deviation final_deviation;
  long ticks = 0;
};

struct ExecutionLog {
  std::vector<TickRecord> records;
  ExecutionSummary summary;

  const Pose& final_observed_object() const { return records.back().observed_object; }
};

// Closed-loop execution with backtracking. Failures (backtrack limit, tick
// budget) are reported in the summary status, not thrown.
// Throws kInvalidArgument for an empty plan or invalid policy/script.
ExecutionLog execute(const EndEffectorTrajectory& plan, const GraspTransform& g,
                     const DeviationPolicy& policy, SimState sim,
                     std::span<const Perturbation> perturbations = {});

// Checks the structural log invariants; returns a description of the first
// violation or nullopt.
std::optional<std::string> check_log(const ExecutionLog& log, const DeviationPolicy& policy);

// ---------------------------------------------------------------------------
// Synthetic tasks

enum class TaskKind { kPour, kLift, kPlace, kSweep };

std::string_view task_kind_name(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

struct SyntheticTaskOptions {
  int frames = 45;
  double fps = 15.0;
  int track_count = 60;
  // Fraction of visible observations in frames >= 1 replaced by uniform pixels.
  double outlier_fraction = 0.0;
  // Override the kind's occlusion script: hide this fraction of tracks, or
  // hide all but `occlusion_keep` tracks.
  std::optional<double> occlusion_fraction;
  std::optional<int> occlusion_keep;
  // Also render per-frame real depth and an affine-distorted predicted copy.
  bool depth_sequence = false;
  double flicker_std = 0.005;  // meters of predicted-depth offset per frame
};

struct SyntheticTask {
  TaskKind kind = TaskKind::kPour;
  std::uint64_t seed = 0;
  CameraIntrinsics K;
  PoseTrajectory object_trajectory;  // absolute object poses, camera frame
  Vec3 half_extents;                 // object box, object frame
  DepthMap depth0;
  Mask mask0;
  TrackSet tracks;
  std::vector<Vec3> track_points;    // object frame, one per track
  std::vector<std::vector<bool>> outlier;  // [track][frame]
  int occlusion_begin = 0;           // scripted window [begin, end)
  int occlusion_end = 0;

  // Only with depth_sequence. real = scale * pred + shift.
  std::vector<DepthMap> real_depth;
  std::vector<DepthMap> predicted_depth;
  std::vector<Mask> masks;
  AffineDepthFit distortion;

  // Object motion relative to frame 0: O(t) * inverse(O(0)).
  PoseTrajectory relative_trajectory() const;
};

SyntheticTask gen_synthetic_task(TaskKind kind, std::uint64_t seed,
                                 const SyntheticTaskOptions& options = {});

// Depth and mask of the task's box at `object_pose` over a tilted table plane.
void render_scene(const CameraIntrinsics& K, const Vec3& half_extents, const Pose& object_pose,
                  DepthMap& depth, Mask& mask);

}  // namespace poseloop
