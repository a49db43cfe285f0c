#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <type_traits>

#include "tms/types.hpp"

namespace tms {

/// Error-to-force-magnitude schedule: clamp(slope*(e/e_o) + offset, f_lo, f_hi).
/// The default constants place the high plateau at e > 0.2*e_o (40 N) and
/// the low plateau at e <= 0.1*e_o (5 N), continuous at both knees.
template <typename S>
struct ForceSchedule {
  S f_hi = S(40);
  S f_lo = S(5);
  S hi_frac = S(0.2);
  S lo_frac = S(0.1);
  S slope = S(350);
  S offset = S(-30);

  bool continuous(S tol = S(1e-9)) const {
    return std::abs(slope * hi_frac + offset - f_hi) <= tol &&
           std::abs(slope * lo_frac + offset - f_lo) <= tol;
  }
};

template <typename S>
S schedule_force(S e, S e_o, const ForceSchedule<S>& sched = ForceSchedule<S>{}) {
  if (!(e_o > S(0))) throw std::invalid_argument("initial error e_o must be positive");
  if (e < S(0)) throw std::invalid_argument("error magnitude must be non-negative");
  return std::clamp(sched.slope * (e / e_o) + sched.offset, sched.f_lo, sched.f_hi);
}

/// The error-compensating direction: the component of the unit error
/// u = (x_f - x_t)/|x_f - x_t| perpendicular to the coil axis F1, plus
/// the angle theta between F1 and u. F2 is null when the target is
/// reached or the error is parallel to the axis.
template <typename S>
struct F2Result {
  std::optional<Vec3<S>> f2;
  S theta = S(0);  // radians in [0, pi]
};

template <typename S>
F2Result<S> compute_F2(const Vec3<S>& x_t, const Vec3<S>& x_f, const Vec3<S>& f1) {
  if (std::abs(f1.norm() - S(1)) > S(1e-9)) {
    throw std::invalid_argument("F1 must be a unit vector");
  }
  Vec3<S> err = x_f - x_t;
  S e = err.norm();
  if (e < S(1e-9)) return {std::nullopt, S(0)};
  Vec3<S> u = err / e;
  S c = std::clamp(f1.dot(u), S(-1), S(1));
  Vec3<S> rej = u - c * f1;
  S rn = rej.norm();
  if (rn < S(1e-9)) return {std::nullopt, c > S(0) ? S(0) : std::numbers::pi_v<S>};
  return {rej / rn, std::acos(c)};
}

/// F*(F1*|cos theta| + F2*|sin theta|); degrades to the pure adhesion
/// force F*F1 when F2 is null.
template <typename S>
Vec3<S> hybrid_force(S magnitude, const std::type_identity_t<Vec3<S>>& f1,
                     const std::type_identity_t<std::optional<Vec3<S>>>& f2,
                     std::type_identity_t<S> theta) {
  if (magnitude < S(0)) throw std::invalid_argument("force magnitude must be non-negative");
  if (!f2) return magnitude * f1;
  return magnitude * (f1 * std::abs(std::cos(theta)) + *f2 * std::abs(std::sin(theta)));
}

/// Proportional centering torque, tool frame: (-k_p*tau_x, -k_p*tau_y, 0).
/// The z component stays zero because torque about the coil axis cannot
/// tilt the coil.
template <typename D>
Vec3<typename D::Scalar> torque_command(const Eigen::MatrixBase<D>& tau_tool,
                                        typename D::Scalar k_p) {
  using S = typename D::Scalar;
  return {-k_p * tau_tool.x(), -k_p * tau_tool.y(), S(0)};
}

template <typename S>
struct ErrorMetrics {
  S e = S(0);    // |x_f - x_t|, mm
  S e_n = S(0);  // signed projection on F1, mm
  S e_p = S(0);  // signed projection on F2, mm (0 when F2 is null)
};

template <typename S>
ErrorMetrics<S> error_metrics(const Vec3<S>& x_t, const Vec3<S>& x_f, const Vec3<S>& f1,
                              const std::type_identity_t<std::optional<Vec3<S>>>& f2) {
  Vec3<S> err = x_f - x_t;
  ErrorMetrics<S> m;
  m.e = err.norm();
  m.e_n = err.dot(f1);
  m.e_p = f2 ? err.dot(*f2) : S(0);
  return m;
}

/// URScript-style compliance parameters. They scale the plant's damping
/// (see PlantConfig); tool z rotation stays stiff.
template <typename S>
struct ComplianceConfig {
  S force_gain = S(1);
  S damping = S(0.1);
};

enum class ForceMode : unsigned char { hybrid, pure };          // Eq.-7 law vs F*F1
enum class MagnitudeMode : unsigned char { scheduled, fixed };  // Eq.-12 schedule vs constant F
enum class F2Sign : unsigned char { error, paper };  // u = (x_f-x_t) vs the printed (x_t-x_f)

template <typename S>
struct ControllerConfig {
  ForceMode force_mode = ForceMode::hybrid;
  MagnitudeMode magnitude_mode = MagnitudeMode::scheduled;
  S fixed_force = S(20);  // N, used when magnitude_mode == fixed
  S k_p = S(0);
  F2Sign f2_sign = F2Sign::error;
  ForceSchedule<S> schedule{};
  ComplianceConfig<S> compliance{};
};

/// Per-run controller memory: e_o is latched at the first tick after
/// force control starts and re-latched only on an explicit retarget.
template <typename S>
struct ControllerState {
  S e_o = S(0);
  bool latched = false;

  void latch(S e) {
    e_o = std::max(e, S(1e-9));
    latched = true;
  }
  void relatch() { latched = false; }
};

template <typename S>
struct ControllerOutput {
  Vec3<S> force = Vec3<S>::Zero();        // N, base frame
  Vec3<S> torque_tool = Vec3<S>::Zero();  // N*mm, tool frame
  S magnitude = S(0);                     // commanded F, N
  S theta = S(0);
  std::optional<Vec3<S>> f2;
  ErrorMetrics<S> metrics{};
};

/// One control cycle: compose the F2 construction, force schedule,
/// hybrid force law and torque law from the current geometry and the
/// measured tool-frame torque.
template <typename S>
ControllerOutput<S> controller_tick(ControllerState<S>& state, const Vec3<S>& x_t,
                                    const Vec3<S>& x_f, const Vec3<S>& f1,
                                    const Wrench<S>& measured_tool,
                                    const ControllerConfig<S>& cfg) {
  ControllerOutput<S> out;
  F2Result<S> f2 = compute_F2(x_t, x_f, f1);
  if (cfg.f2_sign == F2Sign::paper && f2.f2) {
    f2.f2 = -*f2.f2;
    f2.theta = std::numbers::pi_v<S> - f2.theta;
  }
  out.f2 = f2.f2;
  out.theta = f2.theta;
  out.metrics = error_metrics(x_t, x_f, f1, f2.f2);

  if (!state.latched) state.latch(out.metrics.e);
  out.magnitude = cfg.magnitude_mode == MagnitudeMode::scheduled
                      ? schedule_force(out.metrics.e, state.e_o, cfg.schedule)
                      : cfg.fixed_force;

  out.force = cfg.force_mode == ForceMode::pure
                  ? out.magnitude * f1
                  : hybrid_force(out.magnitude, f1, f2.f2, f2.theta);
  out.torque_tool = torque_command(measured_tool.torque, cfg.k_p);
  return out;
}

}  // namespace tms
