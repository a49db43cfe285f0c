#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "tms/types.hpp"

namespace tms {

/// Point-to-point timing law with capped velocity and acceleration.
/// When v_max^2/a > s the cruise phase vanishes and the peak velocity
/// drops to sqrt(s*a) (triangular profile).
template <typename S>
struct TrapezoidProfile {
  enum class Shape { trapezoid, triangle, null };

  S path_length = S(0);     // s, mm
  S cruise_velocity = S(0); // commanded v_max, mm/s
  S acceleration = S(0);    // a, mm/s^2
  S peak_velocity = S(0);   // v_max or sqrt(s*a), mm/s
  S ramp_time = S(0);       // t_a, s
  S total_time = S(0);      // t_f, s
  Shape shape = Shape::null;
};

template <typename S>
TrapezoidProfile<S> plan_profile(S s, S v_max, S a) {
  if (!(v_max > S(0)) || !(a > S(0))) {
    throw std::invalid_argument("profile limits must be positive");
  }
  if (s < S(0)) throw std::invalid_argument("path length must be non-negative");

  TrapezoidProfile<S> p;
  p.path_length = s;
  p.cruise_velocity = v_max;
  p.acceleration = a;
  if (s == S(0)) {
    p.shape = TrapezoidProfile<S>::Shape::null;
    return p;
  }
  if (v_max * v_max / a > s) {
    p.shape = TrapezoidProfile<S>::Shape::triangle;
    p.peak_velocity = std::sqrt(s * a);
    p.ramp_time = std::sqrt(s / a);
    p.total_time = S(2) * p.ramp_time;
  } else {
    p.shape = TrapezoidProfile<S>::Shape::trapezoid;
    p.peak_velocity = v_max;
    p.ramp_time = v_max / a;
    p.total_time = s / v_max + v_max / a;
  }
  return p;
}

/// Displacement (mm) and velocity (mm/s) at time t. Times outside
/// [0, t_f] clamp to the endpoint values.
template <typename S>
std::pair<S, S> eval_profile(const TrapezoidProfile<S>& p, S t) {
  using Shape = typename TrapezoidProfile<S>::Shape;
  if (p.shape == Shape::null || t >= p.total_time) return {p.path_length, S(0)};
  if (t <= S(0)) return {S(0), S(0)};

  const S a = p.acceleration;
  const S v = p.peak_velocity;
  if (t < p.ramp_time) {
    return {a * t * t / S(2), a * t};
  }
  if (t <= p.total_time - p.ramp_time) {
    return {v * p.ramp_time / S(2) + v * (t - p.ramp_time), v};
  }
  const S r = p.total_time - t;  // time remaining in the deceleration ramp
  return {p.path_length - a * r * r / S(2), a * r};
}

}  // namespace tms
