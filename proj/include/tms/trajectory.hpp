#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tms/errors.hpp"
#include "tms/geometry.hpp"
#include "tms/profile.hpp"

namespace tms {

/// Virtual sphere the coil may not enter during the approach. Centered a
/// configurable height above the head center so the final descent meets
/// the head face closer to perpendicular.
template <typename S>
struct SphereGuard {
  Vec3<S> center = Vec3<S>::Zero();  // x_o, mm
  S radius = S(0);                   // R_s, mm

  static SphereGuard around_head(const Vec3<S>& head_center, S head_radius,
                                 const Vec3<S>& up = Vec3<S>::UnitZ(),
                                 S center_offset = S(25), S clearance = S(30)) {
    SphereGuard g;
    g.center = head_center + center_offset * up.normalized();
    g.radius = head_radius + clearance;
    if (!(g.radius > S(0))) throw std::invalid_argument("guard radius must be positive");
    if (g.radius <= head_radius + std::abs(center_offset)) {
      throw std::invalid_argument("guard sphere does not contain the head");
    }
    return g;
  }
};

template <typename S>
struct ApproachLimits {
  S v_max = S(30);             // cruise velocity, mm/s
  S accel = S(100);            // mm/s^2
  S ang_v_max = S(0.5);        // rad/s
  S ang_accel = S(2);          // rad/s^2
  S descent_velocity = S(0);   // mm/s; 0 means "same as v_max"
  S contact_threshold = S(2);  // N
  S dt = S(0.002);             // control period, s

  S descent_v() const { return descent_velocity > S(0) ? descent_velocity : v_max; }
};

template <typename S>
struct TimedPose {
  S t;
  Pose<S> pose;  // base <- tool; coil axis is the tool +z column
};

/// Sampled pose trajectory for one approach phase, with the key points
/// that defined it. Timestamps are strictly increasing at the control
/// period, final sample exactly at total_time.
template <typename S>
struct PhasePlan {
  int phase = 0;
  std::vector<TimedPose<S>> samples;
  Vec3<S> x_start = Vec3<S>::Zero();
  Vec3<S> x_si = Vec3<S>::Zero();
  Vec3<S> x_sf = Vec3<S>::Zero();
  Vec3<S> x_target = Vec3<S>::Zero();
  S total_time = S(0);

  const Pose<S>& final_pose() const { return samples.back().pose; }
};

/// Point where the ray from the guard center through x pierces the surface.
template <typename S>
Vec3<S> sphere_surface_point(const SphereGuard<S>& g, const Vec3<S>& x) {
  Vec3<S> r = x - g.center;
  S n = r.norm();
  if (n <= S(0)) throw std::invalid_argument("point coincides with guard center");
  return g.center + g.radius / n * r;
}

namespace detail {

// Sample times 0, dt, 2dt, ..., t_f (final point exact, never duplicated).
template <typename S>
std::vector<S> sample_times(S t_f, S dt) {
  std::vector<S> ts;
  if (t_f <= S(0)) {
    ts.push_back(S(0));
    return ts;
  }
  long n = static_cast<long>(std::floor(t_f / dt * (S(1) + S(1e-12))));
  for (long k = 0; k <= n; ++k) ts.push_back(S(k) * dt);
  if (ts.back() < t_f - dt * S(1e-9)) {
    ts.push_back(t_f);
  } else {
    ts.back() = t_f;
  }
  return ts;
}

}  // namespace detail

/// Phase 1: straight-line run from the start position to the guard
/// surface while turning the coil axis onto x_o - x_start. Position and
/// orientation follow independent profiles and run concurrently.
template <typename S>
PhasePlan<S> plan_phase1(const Vec3<S>& x_start, const Mat3<S>& start_orientation,
                         const SphereGuard<S>& guard, const ApproachLimits<S>& limits) {
  Vec3<S> r = x_start - guard.center;
  S dist = r.norm();
  if (dist < guard.radius - S(1e-9)) {
    throw PlanningError("phase 1 start lies inside the guard sphere");
  }
  Vec3<S> approach_dir = -r / dist;  // points from the start at the guard center
  Vec3<S> x_si = guard.center + guard.radius * (r / dist);
  S s = std::max(S(0), dist - guard.radius);

  Vec3<S> z0 = start_orientation.col(2);
  Mat3<S> turn = minimal_rotation(z0, approach_dir);
  Eigen::AngleAxis<S> aa(turn);
  S total_angle = aa.angle();

  TrapezoidProfile<S> pos_prof =
      s > S(0) ? plan_profile(s, limits.v_max, limits.accel) : TrapezoidProfile<S>{};
  TrapezoidProfile<S> rot_prof = total_angle > S(0)
                                     ? plan_profile(total_angle, limits.ang_v_max, limits.ang_accel)
                                     : TrapezoidProfile<S>{};

  PhasePlan<S> plan;
  plan.phase = 1;
  plan.x_start = x_start;
  plan.x_si = x_si;
  plan.total_time = std::max(pos_prof.total_time, rot_prof.total_time);

  Vec3<S> move_dir = s > S(0) ? (x_si - x_start).normalized() : Vec3<S>::Zero();
  for (S t : detail::sample_times(plan.total_time, limits.dt)) {
    Pose<S> p;
    p.translation = x_start + move_dir * eval_profile(pos_prof, t).first;
    S ang = total_angle > S(0) ? eval_profile(rot_prof, t).first : S(0);
    p.rotation = total_angle > S(0)
                     ? (Eigen::AngleAxis<S>(ang, aa.axis()).toRotationMatrix() * start_orientation)
                     : start_orientation;
    plan.samples.push_back({t, p});
  }
  return plan;
}

/// Phase 2: minor great-circle arc on the guard surface from x_si to
/// x_sf (the piercing point of the ray x_o -> x_f), coil axis pointing
/// at the guard center throughout. Roll is parallel-transported from the
/// entry orientation.
template <typename S>
PhasePlan<S> plan_phase2(const Mat3<S>& orientation_at_si, const Vec3<S>& x_si,
                         const Vec3<S>& x_f, const SphereGuard<S>& guard,
                         const ApproachLimits<S>& limits) {
  Vec3<S> rs = x_si - guard.center;
  if (std::abs(rs.norm() - guard.radius) > S(1e-6) * std::max(S(1), guard.radius)) {
    throw std::invalid_argument("phase 2 must start on the guard surface");
  }
  if ((x_f - guard.center).norm() < S(1e-9)) {
    throw std::invalid_argument("target coincides with the guard center");
  }
  Vec3<S> u_si = rs.normalized();
  Vec3<S> x_sf = sphere_surface_point(guard, x_f);
  Vec3<S> u_sf = (x_sf - guard.center).normalized();

  S alpha = std::acos(std::clamp(u_si.dot(u_sf), S(-1), S(1)));
  if (alpha > std::numbers::pi_v<S> - S(1e-6)) {
    throw PlanningError("phase 2 endpoints are antipodal; the great circle is not unique");
  }

  PhasePlan<S> plan;
  plan.phase = 2;
  plan.x_start = x_si;
  plan.x_si = x_si;
  plan.x_sf = x_sf;
  plan.x_target = x_f;

  S arc_len = guard.radius * alpha;
  TrapezoidProfile<S> prof =
      arc_len > S(0) ? plan_profile(arc_len, limits.v_max, limits.accel) : TrapezoidProfile<S>{};
  plan.total_time = prof.total_time;

  Mat3<S> r_prev = minimal_rotation(Vec3<S>(orientation_at_si.col(2)), Vec3<S>(-u_si)) *
                   orientation_at_si;
  Vec3<S> axis_prev = -u_si;
  for (S t : detail::sample_times(plan.total_time, limits.dt)) {
    S tau = arc_len > S(0) ? eval_profile(prof, t).first / arc_len : S(0);
    Vec3<S> u = slerp_unit(u_si, u_sf, tau);
    Vec3<S> axis = -u;
    Mat3<S> rot = minimal_rotation(axis_prev, axis) * r_prev;
    if (orthonormality_defect(rot) > S(1e-12)) rot = reorthonormalize(rot);
    plan.samples.push_back({t, Pose<S>{rot, guard.center + guard.radius * u}});
    r_prev = rot;
    axis_prev = axis;
  }
  return plan;
}

/// Phase 3: constant-velocity straight descent from x_sf toward the
/// target with the orientation frozen; the coil axis already points
/// along the descent direction when phase 2 ended.
template <typename S>
PhasePlan<S> plan_phase3(const Pose<S>& pose_at_sf, const Vec3<S>& x_f, S descent_velocity,
                         S dt) {
  if (!(descent_velocity > S(0))) throw std::invalid_argument("descent velocity must be positive");
  Vec3<S> delta = x_f - pose_at_sf.translation;
  S dist = delta.norm();

  PhasePlan<S> plan;
  plan.phase = 3;
  plan.x_start = pose_at_sf.translation;
  plan.x_sf = pose_at_sf.translation;
  plan.x_target = x_f;
  if (dist < S(1e-9)) {
    plan.samples.push_back({S(0), pose_at_sf});
    return plan;
  }
  Vec3<S> dir = delta / dist;
  if (dir.cross(coil_axis(pose_at_sf)).norm() > S(1e-6)) {
    throw std::invalid_argument("phase 3 descent is not collinear with the coil axis");
  }
  plan.total_time = dist / descent_velocity;
  for (S t : detail::sample_times(plan.total_time, dt)) {
    Pose<S> p = pose_at_sf;
    p.translation = pose_at_sf.translation + dir * std::min(descent_velocity * t, dist);
    plan.samples.push_back({t, p});
  }
  return plan;
}

/// Contact test used to terminate phase 3.
template <typename S>
bool detect_contact(const Vec3<S>& measured_force, S threshold) {
  if (!(threshold > S(0))) throw std::invalid_argument("contact threshold must be positive");
  return measured_force.norm() > threshold;
}

}  // namespace tms
