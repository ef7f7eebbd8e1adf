#include <cmath>
#include <numbers>
#include <string>

#include "poseloop/error.hpp"
#include "poseloop/execsim.hpp"

namespace poseloop {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Relative slack so that an exact multiple of the speed limit snaps.
constexpr double kSnapSlack = 1e-9;

}  // namespace

Deviation deviation(const Pose& observed, const Pose& expected) {
  return {(observed.translation() - expected.translation()).norm(),
          rotation_angle(observed.rotation(), expected.rotation())};
}

bool exceeds(const Deviation& d, const DeviationPolicy& policy) {
  return d.translation > policy.max_translation || d.rotation_deg > policy.max_rotation_deg;
}

void DeviationPolicy::validate() const {
  if (!(max_translation > 0.0 && max_rotation_deg > 0.0 && settle_translation > 0.0 &&
        settle_rotation_deg > 0.0)) {
    throw Error(Errc::kInvalidArgument, "policy thresholds must be positive");
  }
  if (!(settle_translation < max_translation && settle_rotation_deg < max_rotation_deg)) {
    throw Error(Errc::kInvalidArgument, "settle tolerances must be below deviation thresholds");
  }
  if (max_backtracks < 1 || tick_budget < 1) {
    throw Error(Errc::kInvalidArgument, "max_backtracks and tick_budget must be positive");
  }
}

std::string_view perturbation_kind_name(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kEeImpulse: return "ee_impulse";
    case PerturbationKind::kGraspSlip: return "grasp_slip";
    case PerturbationKind::kObservationNoise: return "observation_noise";
  }
  return "?";
}

PerturbationKind parse_perturbation_kind(std::string_view name) {
  if (name == "ee_impulse") return PerturbationKind::kEeImpulse;
  if (name == "grasp_slip") return PerturbationKind::kGraspSlip;
  if (name == "observation_noise") return PerturbationKind::kObservationNoise;
  throw Error(Errc::kParse, "unknown perturbation kind '" + std::string(name) + "'");
}

void Perturbation::validate(std::size_t plan_length) const {
  if (trigger < 0) throw Error(Errc::kInvalidArgument, "trigger must be non-negative");
  if (trigger_kind == TriggerKind::kWaypoint && static_cast<std::size_t>(trigger) >= plan_length) {
    throw Error(Errc::kInvalidArgument, "waypoint trigger beyond the plan");
  }
  if (!delta.translation().allFinite() || !delta.rotation().coeffs().allFinite() ||
      !std::isfinite(noise_translation) || !std::isfinite(noise_rotation_deg) ||
      noise_translation < 0.0 || noise_rotation_deg < 0.0) {
    throw Error(Errc::kInvalidArgument, "perturbation magnitudes must be finite");
  }
}

SimState SimState::at(const Pose& ee, const GraspTransform& attach, std::uint64_t seed) {
  SimState s;
  s.ee_pose = ee;
  s.attach = attach;
  s.rng.seed(seed);
  return s;
}

Pose sim_step(SimState& state, const Pose& command, std::span<const Perturbation> active) {
  // Motion, clamped independently in translation and rotation.
  Vec3 t = state.ee_pose.translation();
  const Vec3 diff = command.translation() - t;
  const double dist = diff.norm();
  if (dist <= state.max_linear_speed * (1.0 + kSnapSlack)) {
    t = command.translation();
  } else {
    t += diff * (state.max_linear_speed / dist);
  }
  Quat q = state.ee_pose.rotation();
  const double angle = rotation_angle(q, command.rotation());
  if (angle <= state.max_angular_speed_deg * (1.0 + kSnapSlack)) {
    q = command.rotation();
  } else {
    q = q.slerp(state.max_angular_speed_deg / angle, command.rotation());
  }
  state.ee_pose = Pose(t, q);

  for (const Perturbation& p : active) {
    switch (p.kind) {
      case PerturbationKind::kEeImpulse:
        state.ee_pose = Pose(state.ee_pose.translation() + p.delta.translation(),
                             p.delta.rotation() * state.ee_pose.rotation());
        break;
      case PerturbationKind::kGraspSlip:
        state.attach = GraspTransform::from_offset(compose(p.delta, state.attach.offset()),
                                                   state.attach.grasp_time());
        break;
      case PerturbationKind::kObservationNoise:
        state.noise_translation = p.noise_translation;
        state.noise_rotation_deg = p.noise_rotation_deg;
        state.rng.seed(p.seed);
        break;
    }
  }
  ++state.tick;

  const Pose object = compose(state.ee_pose, state.attach.offset());
  if (state.noise_translation == 0.0 && state.noise_rotation_deg == 0.0) return object;
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec3 dt;
  Vec3 dr;
  for (int k = 0; k < 3; ++k) dt[k] = state.noise_translation * unit(state.rng);
  for (int k = 0; k < 3; ++k) dr[k] = state.noise_rotation_deg * kDegToRad * unit(state.rng);
  return {object.translation() + dt, rotvec_to_quat(dr) * object.rotation()};
}

Simulator::Simulator(SimState state, std::vector<Perturbation> script)
    : state_(std::move(state)), script_(std::move(script)), fired_(script_.size(), false) {}

Pose Simulator::step(const Pose& command, std::size_t waypoint) {
  std::vector<Perturbation> active;
  for (std::size_t k = 0; k < script_.size(); ++k) {
    if (fired_[k]) continue;
    const Perturbation& p = script_[k];
    const bool due = p.trigger_kind == TriggerKind::kTick
                         ? state_.tick >= p.trigger
                         : waypoint >= static_cast<std::size_t>(p.trigger);
    if (due) {
      active.push_back(p);
      fired_[k] = true;
    }
  }
  return sim_step(state_, command, active);
}

}  // namespace poseloop
