#include <string>
#include <vector>

#include "poseloop/error.hpp"
#include "poseloop/execsim.hpp"

namespace poseloop {

std::string_view tick_event_name(TickEvent e) {
  switch (e) {
    case TickEvent::kAdvance: return "advance";
    case TickEvent::kSettle: return "settle";
    case TickEvent::kBacktrack: return "backtrack";
  }
  return "?";
}

std::string_view execution_status_name(ExecutionStatus s) {
  switch (s) {
    case ExecutionStatus::kCompleted: return "completed";
    case ExecutionStatus::kBacktrackLimit: return "backtrack_limit";
    case ExecutionStatus::kBudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

ExecutionLog execute(const EndEffectorTrajectory& plan, const GraspTransform& g,
                     const DeviationPolicy& policy, SimState sim,
                     std::span<const Perturbation> perturbations) {
  policy.validate();
  if (plan.size() == 0) throw Error(Errc::kInvalidArgument, "plan is empty");
  for (std::size_t k = 0; k < perturbations.size(); ++k) {
    try {
      perturbations[k].validate(plan.size());
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), k);
    }
  }

  const std::size_t n = plan.size();
  std::vector<Pose> target_object;
  target_object.reserve(n);
  for (std::size_t i = 0; i < n; ++i) target_object.push_back(expected_object_pose(plan.pose(i), g));

  Simulator simulator(std::move(sim), {perturbations.begin(), perturbations.end()});
  GraspTransform belief = g;
  Pose ee_from_object = inverse(belief.offset());
  std::vector<bool> settled(n, false);
  std::size_t i = 0;
  bool recovering = false;

  ExecutionLog log;
  ExecutionSummary& summary = log.summary;
  for (long tick = 0; tick < policy.tick_budget; ++tick) {
    TickRecord rec;
    rec.tick = tick;
    rec.waypoint = i;
    rec.commanded_ee = compose(target_object[i], ee_from_object);
    rec.observed_object = simulator.step(rec.commanded_ee, i);
    rec.ee = simulator.state().ee_pose;
    rec.expected_object = target_object[i];
    rec.dev = deviation(rec.observed_object, rec.expected_object);

    const Deviation reach = deviation(rec.ee, rec.commanded_ee);
    const bool reached = reach.translation <= policy.settle_translation &&
                         reach.rotation_deg <= policy.settle_rotation_deg;

    if (!recovering && exceeds(rec.dev, policy)) {
      rec.event = TickEvent::kBacktrack;
      ++summary.backtracks;
      std::size_t j = 0;
      for (std::size_t k = i; k-- > 0;) {
        if (settled[k]) {
          j = k;
          break;
        }
      }
      rec.backtrack_to = j;
      log.records.push_back(rec);
      if (summary.backtracks > policy.max_backtracks) {
        summary.status = ExecutionStatus::kBacktrackLimit;
        break;
      }
      if (policy.realign_on_backtrack) {
        belief = GraspTransform::capture(rec.observed_object, rec.ee, belief.grasp_time());
        ee_from_object = inverse(belief.offset());
      }
      i = j;
      recovering = true;
      continue;
    }
    if (reached) {
      rec.event = TickEvent::kSettle;
      settled[i] = true;
      recovering = false;
      log.records.push_back(rec);
      if (i + 1 == n) {
        summary.status = ExecutionStatus::kCompleted;
        summary.completed = true;
        break;
      }
      ++i;
      continue;
    }
    rec.event = TickEvent::kAdvance;
    log.records.push_back(rec);
  }
  summary.ticks = static_cast<long>(log.records.size());
  if (!log.records.empty()) summary.final_deviation = log.records.back().dev;
  return log;
}

std::optional<std::string> check_log(const ExecutionLog& log, const DeviationPolicy& policy) {
  int backtracks = 0;
  for (std::size_t k = 0; k < log.records.size(); ++k) {
    const TickRecord& r = log.records[k];
    const std::string where = "record " + std::to_string(k) + ": ";
    if (k > 0) {
      const TickRecord& prev = log.records[k - 1];
      if (prev.event == TickEvent::kBacktrack) {
        if (r.waypoint != *prev.backtrack_to) return where + "did not resume at backtrack target";
      } else if (prev.event == TickEvent::kSettle) {
        if (r.waypoint != prev.waypoint + 1) return where + "index did not advance by one";
      } else if (r.waypoint != prev.waypoint) {
        return where + "index changed without an event";
      }
    }
    if (r.event == TickEvent::kBacktrack) {
      ++backtracks;
      if (!exceeds(r.dev, policy)) return where + "backtrack without a deviation over threshold";
      if (!r.backtrack_to) return where + "backtrack without a target";
      if (r.waypoint > 0 && *r.backtrack_to >= r.waypoint) {
        return where + "backtrack did not decrease the index";
      }
    }
  }
  if (backtracks != log.summary.backtracks) return std::string("summary backtrack count mismatch");
  if (log.summary.completed != (log.summary.status == ExecutionStatus::kCompleted)) {
    return std::string("summary completed flag inconsistent with status");
  }
  return std::nullopt;
}

}  // namespace poseloop
