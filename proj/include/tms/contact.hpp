#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <type_traits>

#include "tms/geometry.hpp"
#include "tms/types.hpp"

namespace tms {

/// Spherical head with a penalty skin: normal force k_n*delta + b_n*ddelta,
/// Coulomb friction with a viscous cap near zero sliding speed.
template <typename S>
struct HeadModel {
  Pose<S> pose = Pose<S>::identity(Frame::base, Frame::head);
  S radius = S(90);              // R_h, mm
  S mu = S(0.6);                 // friction coefficient
  S k_n = S(10);                 // N/mm
  S b_n = S(0.5);                // N*s/mm
  S friction_viscous_cap = S(50);  // c_v, N*s/mm; friction = min(mu*F_n, c_v*|v_t|)

  Vec3<S> center() const { return pose.translation; }
};

template <typename S>
Vec3<S> head_center(const HeadModel<S>& h) {
  return h.pose.translation;
}

/// Concave spherical-cap coil floor. The floor surface is the part of a
/// sphere of radius R_f (curvature center on the +z tool axis) within
/// `rim_aperture` of the floor center direction.
template <typename S>
struct CoilModel {
  S floor_radius = S(100);                         // R_f >= R_h, mm
  S rim_aperture = S(30) * std::numbers::pi_v<S> / S(180);  // radians

  void validate(S head_radius) const {
    if (!(floor_radius >= head_radius)) {
      throw std::invalid_argument("coil floor radius must be >= head radius");
    }
    if (!(rim_aperture > S(0)) || !(rim_aperture < std::numbers::pi_v<S> / S(2))) {
      throw std::invalid_argument("rim aperture must lie in (0, pi/2)");
    }
  }
};

template <typename S>
struct Twist {
  Vec3<S> linear = Vec3<S>::Zero();   // mm/s
  Vec3<S> angular = Vec3<S>::Zero();  // rad/s
};

/// Discretization of the coil cap used to integrate the contact patch.
/// Azimuth is integrated in closed form per ring, so only the polar
/// direction is discretized.
struct PatchGrid {
  int rings = 128;
};

/// Result of one contact evaluation. Forces in the base frame; tau_tool
/// is the reaction torque on the coil about the floor center x_t,
/// expressed in the tool frame (what the wrist sensor sees).
template <typename S>
struct ContactState {
  bool in_contact = false;
  S penetration = S(0);                      // effective max overlap inside the cap, mm
  S penetration_rate = S(0);                 // mm/s
  Vec3<S> patch_centroid = Vec3<S>::Zero();  // base frame, mm
  Vec3<S> patch_normal = Vec3<S>::Zero();    // area-averaged, points from head into coil
  S normal_force = S(0);                     // F_n, N
  Vec3<S> friction = Vec3<S>::Zero();        // on the coil, base frame, N
  Wrench<S> wrench_on_coil{};                // base frame, torque about x_t
  Wrench<S> wrench_on_head{};                // = -wrench_on_coil, same point
  Vec3<S> tau_tool = Vec3<S>::Zero();        // reaction torque on coil, tool frame, N*mm
  S force_magnitude = S(0);                  // |F_c|, N
};

namespace detail {

// Depth of a coil-floor point below the head surface, as a function of
// the angle psi between its direction from the curvature center and the
// center-to-center direction u (law of cosines on the point, c_f, h
// triangle). Positive inside the head.
template <typename S>
S floor_point_depth(S d, S head_radius, S floor_radius, S cos_psi) {
  return head_radius -
         std::sqrt(std::max(S(0), floor_radius * floor_radius + d * d -
                                      S(2) * floor_radius * d * cos_psi));
}

}  // namespace detail

/// Nearest point on the cap boundary circle to direction u (both unit).
template <typename S>
Vec3<S> nearest_cap_direction(const Vec3<S>& u, const Vec3<S>& cap_axis, S aperture) {
  Vec3<S> tangent = u - u.dot(cap_axis) * cap_axis;
  if (tangent.squaredNorm() < S(1e-18)) return cap_axis;
  tangent.normalize();
  return std::cos(aperture) * cap_axis + std::sin(aperture) * tangent;
}

/// Contact between the coil cap and the head sphere. The patch is the
/// cap region with positive local overlap, integrated on a polar grid
/// under the uniform-pressure assumption; the resultant acts at the
/// patch centroid.
template <typename S>
ContactState<S> contact_wrench(const CoilModel<S>& coil, const Pose<S>& coil_pose,
                               const HeadModel<S>& head, const Twist<S>& coil_twist = {},
                               const Twist<S>& head_twist = {}, const PatchGrid& grid = {}) {
  ContactState<S> st;
  const Vec3<S> x_t = coil_pose.translation;
  const Vec3<S> axis = coil_axis(coil_pose);  // F1, toward the head
  const Vec3<S> c_f = x_t + coil.floor_radius * axis;
  const Vec3<S> h = head_center(head);

  const Vec3<S> to_head = h - c_f;
  const S d = to_head.norm();
  if (d < S(1e-12)) return st;  // head centered on the curvature center: delta <= 0
  const Vec3<S> u = to_head / d;

  // Deepest floor point inside the head is the cap direction nearest u;
  // on axis this reduces to the sphere-pair overlap d + R_h - R_f.
  const Vec3<S> cap_axis = -axis;
  const S psi0 = std::acos(std::clamp(u.dot(cap_axis), S(-1), S(1)));
  const S psi_near = std::max(S(0), psi0 - coil.rim_aperture);
  const S delta_eff =
      detail::floor_point_depth(d, head.radius, coil.floor_radius, std::cos(psi_near));
  if (delta_eff <= S(0)) return st;

  st.in_contact = true;
  st.penetration = delta_eff;

  // The submerged region of the floor sphere is bounded by the circle
  // where the two spheres intersect: directions v from c_f with
  // angle(v, u) < psi_max. Intersect that with the cap ring by ring;
  // the azimuthal extent of each ring is exact, so only psi is
  // discretized.
  const S cos_psi_max =
      std::clamp((d * d + coil.floor_radius * coil.floor_radius - head.radius * head.radius) /
                     (S(2) * coil.floor_radius * d),
                 S(-1), S(1));

  Vec3<S> e1 = u - u.dot(cap_axis) * cap_axis;  // in-plane direction the patch shifts toward
  const S e1_norm = e1.norm();
  if (e1_norm > S(1e-12)) {
    e1 /= e1_norm;
  } else {
    e1 = cap_axis.cross(Vec3<S>::UnitX());
    if (e1.squaredNorm() < S(1e-12)) e1 = cap_axis.cross(Vec3<S>::UnitY());
    e1.normalize();
  }

  const S sin_psi0 = std::sin(psi0), cos_psi0 = std::cos(psi0);
  const S dpsi = coil.rim_aperture / S(grid.rings);
  S area = S(0), acc_axis = S(0), acc_e1 = S(0);
  for (int i = 0; i < grid.rings; ++i) {
    const S psi = (S(i) + S(0.5)) * dpsi;
    const S sp = std::sin(psi), cp = std::cos(psi);
    S chi_max;
    const S denom = sp * sin_psi0;
    if (denom < S(1e-14)) {
      chi_max = cp * cos_psi0 > cos_psi_max ? std::numbers::pi_v<S> : S(0);
    } else {
      chi_max = std::acos(std::clamp((cos_psi_max - cp * cos_psi0) / denom, S(-1), S(1)));
    }
    if (chi_max <= S(0)) continue;
    const S w = sp * dpsi;
    area += S(2) * chi_max * w;
    acc_axis += cp * S(2) * chi_max * w;
    acc_e1 += sp * S(2) * std::sin(chi_max) * w;
  }
  if (area > S(0)) {
    const Vec3<S> mean_v = (acc_axis * cap_axis + acc_e1 * e1) / area;
    st.patch_centroid = c_f + coil.floor_radius * mean_v;
    st.patch_normal = mean_v.normalized();
  } else {
    // Patch thinner than a ring: collapse it to the nearest cap point.
    const Vec3<S> v_near =
        psi0 <= coil.rim_aperture ? u : nearest_cap_direction(u, cap_axis, coil.rim_aperture);
    st.patch_centroid = c_f + coil.floor_radius * v_near;
    st.patch_normal = v_near;
  }

  // Penetration rate of the sphere pair (positive while approaching).
  const Vec3<S> v_cf = coil_twist.linear + coil_twist.angular.cross(c_f - x_t);
  st.penetration_rate = u.dot(head_twist.linear - v_cf);

  st.normal_force = std::max(S(0), head.k_n * delta_eff + head.b_n * st.penetration_rate);

  // Coulomb friction with viscous regularization, applied at the centroid.
  const Vec3<S>& pbar = st.patch_centroid;
  const Vec3<S> v_coil_at = coil_twist.linear + coil_twist.angular.cross(pbar - x_t);
  const Vec3<S> v_head_at = head_twist.linear + head_twist.angular.cross(pbar - h);
  const Vec3<S> v_rel = v_coil_at - v_head_at;
  const Vec3<S> v_tan = v_rel - v_rel.dot(st.patch_normal) * st.patch_normal;
  const S speed = v_tan.norm();
  if (speed > S(1e-12)) {
    const S mag = std::min(head.mu * st.normal_force, head.friction_viscous_cap * speed);
    st.friction = -mag / speed * v_tan;
  }

  const Vec3<S> f_on_coil = st.normal_force * st.patch_normal + st.friction;
  st.wrench_on_coil.force = f_on_coil;
  st.wrench_on_coil.torque = (pbar - x_t).cross(f_on_coil);
  st.wrench_on_head = -st.wrench_on_coil;
  st.tau_tool = coil_pose.rotation.transpose() * st.wrench_on_coil.torque;
  st.force_magnitude = f_on_coil.norm();
  return st;
}

/// Quasi-static admittance standing in for the robot's compliant force
/// mode; no inertia, damping only. Tool-z rotation is held stiff.
template <typename S>
struct PlantConfig {
  S translational_damping = S(4);      // D_t, N*s/mm
  S rotational_damping = S(150000);    // D_r, N*mm*s/rad
  S dt = S(0.002);                     // s

  void validate() const {
    if (!(translational_damping > S(0)) || !(rotational_damping > S(0)) || !(dt > S(0))) {
      throw std::invalid_argument("plant damping constants and dt must be positive");
    }
  }
};

template <typename S>
struct PlantStep {
  Pose<S> pose;
  Twist<S> twist;
  ContactState<S> contact;
};

/// Advance the coil one control period under the commanded wrench
/// (force in base frame, torque in tool frame) plus the contact reaction.
template <typename S>
PlantStep<S> step_plant(const Pose<S>& coil_pose, const Twist<S>& coil_twist,
                        const std::type_identity_t<Vec3<S>>& commanded_force,
                        const std::type_identity_t<Vec3<S>>& commanded_torque_tool,
                        const CoilModel<S>& coil, const HeadModel<S>& head,
                        const Twist<S>& head_twist, const PlantConfig<S>& cfg,
                        const PatchGrid& grid = {}) {
  cfg.validate();
  PlantStep<S> out;
  out.contact = contact_wrench(coil, coil_pose, head, coil_twist, head_twist, grid);

  out.twist.linear =
      (commanded_force + out.contact.wrench_on_coil.force) / cfg.translational_damping;

  const Vec3<S> torque_world =
      coil_pose.rotation * commanded_torque_tool + out.contact.wrench_on_coil.torque;
  Vec3<S> omega_tool = coil_pose.rotation.transpose() * torque_world / cfg.rotational_damping;
  omega_tool.z() = S(0);  // stiff axis: rotation about the coil axis is held
  out.twist.angular = coil_pose.rotation * omega_tool;

  out.pose = coil_pose;
  out.pose.translation += out.twist.linear * cfg.dt;
  const S angle = out.twist.angular.norm() * cfg.dt;
  if (angle > S(0)) {
    out.pose.rotation =
        Eigen::AngleAxis<S>(angle, out.twist.angular.normalized()).toRotationMatrix() *
        coil_pose.rotation;
    if (orthonormality_defect(out.pose.rotation) > S(1e-12)) {
      out.pose.rotation = reorthonormalize(out.pose.rotation);
    }
  }
  return out;
}

}  // namespace tms
