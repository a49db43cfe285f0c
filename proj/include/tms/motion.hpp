#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tms/geometry.hpp"
#include "tms/types.hpp"

namespace tms {

/// Scripted head displacement, expressed in the head frame at t = 0.
/// `ramp` runs its legs back to back starting at `start_time`; `steps`
/// jumps to each cumulative offset at its time.
template <typename S>
struct HeadMotionScript {
  enum class Type { fixed, ramp, steps };

  struct Leg {
    Vec3<S> axis = Vec3<S>::UnitX();  // unit, head frame
    S distance = S(7);                // mm
    S speed = S(1);                   // mm/s
  };
  struct Step {
    S time = S(0);
    Vec3<S> offset = Vec3<S>::Zero();  // total offset once reached, head frame, mm
  };

  Type type = Type::fixed;
  S start_time = S(0);
  std::vector<Leg> legs;
  std::vector<Step> steps;

  void validate() const {
    if (type == Type::ramp) {
      if (legs.empty()) throw std::invalid_argument("ramp script needs at least one leg");
      for (const auto& l : legs) {
        if (!(l.speed > S(0)) || l.distance < S(0)) {
          throw std::invalid_argument("ramp legs need positive speed and non-negative distance");
        }
      }
    }
    if (type == Type::steps && steps.empty()) {
      throw std::invalid_argument("step script needs at least one step");
    }
  }
};

/// Head-frame displacement at time t.
template <typename S>
Vec3<S> script_offset(const HeadMotionScript<S>& script, S t) {
  using Type = typename HeadMotionScript<S>::Type;
  switch (script.type) {
    case Type::fixed:
      return Vec3<S>::Zero();
    case Type::ramp: {
      Vec3<S> off = Vec3<S>::Zero();
      S leg_start = script.start_time;
      for (const auto& leg : script.legs) {
        const S duration = leg.distance / leg.speed;
        if (t <= leg_start) break;
        const S progressed = std::min(t - leg_start, duration);
        off += leg.axis.normalized() * (leg.speed * progressed);
        leg_start += duration;
      }
      return off;
    }
    case Type::steps: {
      Vec3<S> off = Vec3<S>::Zero();
      for (const auto& s : script.steps) {
        if (t >= s.time) off = s.offset;
      }
      return off;
    }
  }
  return Vec3<S>::Zero();
}

/// Head-frame velocity at time t (zero for fixed and step scripts).
template <typename S>
Vec3<S> script_velocity(const HeadMotionScript<S>& script, S t) {
  if (script.type != HeadMotionScript<S>::Type::ramp) return Vec3<S>::Zero();
  S leg_start = script.start_time;
  for (const auto& leg : script.legs) {
    const S duration = leg.distance / leg.speed;
    if (t >= leg_start && t < leg_start + duration) {
      return leg.axis.normalized() * leg.speed;
    }
    leg_start += duration;
  }
  return Vec3<S>::Zero();
}

/// Time span over which the script moves the head, if it moves at all.
template <typename S>
std::optional<std::pair<S, S>> motion_window(const HeadMotionScript<S>& script) {
  using Type = typename HeadMotionScript<S>::Type;
  if (script.type == Type::ramp) {
    S total = S(0);
    for (const auto& leg : script.legs) total += leg.distance / leg.speed;
    if (total <= S(0)) return std::nullopt;
    return std::make_pair(script.start_time, script.start_time + total);
  }
  if (script.type == Type::steps && !script.steps.empty()) {
    auto [lo, hi] = std::minmax_element(
        script.steps.begin(), script.steps.end(),
        [](const auto& a, const auto& b) { return a.time < b.time; });
    return std::make_pair(lo->time, hi->time);
  }
  return std::nullopt;
}

/// Head pose at time t: the t = 0 pose translated by the scripted offset
/// (mapped through the head orientation); the paper's dummy stage only
/// translates.
template <typename S>
Pose<S> head_pose_at(const HeadMotionScript<S>& script, const Pose<S>& initial_pose, S t) {
  Pose<S> p = initial_pose;
  p.translation += initial_pose.rotation * script_offset(script, t);
  return p;
}

template <typename S>
Vec3<S> head_velocity_at(const HeadMotionScript<S>& script, const Pose<S>& initial_pose, S t) {
  return initial_pose.rotation * script_velocity(script, t);
}

}  // namespace tms
