#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tms/types.hpp"

namespace tms {

/// Semantic tag for the coordinate frame a pose refers to. `unspecified`
/// is a wildcard that chains with anything; the other tags exist so that
/// calibration-style compositions can be checked for frame mismatches.
enum class Frame : unsigned char { unspecified, base, camera, effector, tool, head };

inline const char* frame_name(Frame f) {
  switch (f) {
    case Frame::base: return "base";
    case Frame::camera: return "camera";
    case Frame::effector: return "effector";
    case Frame::tool: return "tool";
    case Frame::head: return "head";
    default: return "unspecified";
  }
}

/// Rigid transform mapping points expressed in `from` coordinates into
/// `to` coordinates: p_to = R * p_from + t. Translation in mm.
template <typename S>
struct Pose {
  Mat3<S> rotation = Mat3<S>::Identity();
  Vec3<S> translation = Vec3<S>::Zero();
  Frame to = Frame::unspecified;
  Frame from = Frame::unspecified;

  static Pose identity(Frame to = Frame::unspecified, Frame from = Frame::unspecified) {
    return {Mat3<S>::Identity(), Vec3<S>::Zero(), to, from};
  }

  Vec3<S> apply(const Vec3<S>& p) const { return rotation * p + translation; }
};

using Posed = Pose<double>;

/// The coil axis convention: tool +z, pointing from the coil floor
/// toward the head once aligned. This is the F1 direction of the
/// force law.
template <typename S>
Vec3<S> coil_axis(const Pose<S>& coil_pose) {
  return coil_pose.rotation.col(2);
}

/// Max absolute entry of R^T R - I; zero for a perfectly orthonormal matrix.
template <typename S>
S orthonormality_defect(const Mat3<S>& r) {
  return ((r.transpose() * r) - Mat3<S>::Identity()).cwiseAbs().maxCoeff();
}

template <typename S>
bool is_rotation(const Mat3<S>& r, S tol = S(1e-9)) {
  return orthonormality_defect(r) <= tol && std::abs(r.determinant() - S(1)) <= tol;
}

/// Nearest rotation via quaternion round trip; cheap and adequate for the
/// drift magnitudes that appear in long compose chains.
template <typename S>
Mat3<S> reorthonormalize(const Mat3<S>& r) {
  Quat<S> q(r);
  q.normalize();
  return q.toRotationMatrix();
}

namespace detail {
inline void check_chain(Frame a_from, Frame b_to) {
  if (a_from == Frame::unspecified || b_to == Frame::unspecified) return;
  if (a_from != b_to) {
    throw std::invalid_argument(std::string("frame mismatch: cannot chain ...<-") +
                                frame_name(a_from) + " with " + frame_name(b_to) + "<-...");
  }
}
}  // namespace detail

/// Matrix product a*b with frames chained (a maps b.to -> a.to).
/// Re-orthonormalizes the resulting rotation when drift exceeds 1e-12.
template <typename S>
Pose<S> compose(const Pose<S>& a, const Pose<S>& b) {
  detail::check_chain(a.from, b.to);
  Pose<S> out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.to = a.to;
  out.from = b.from;
  if (orthonormality_defect(out.rotation) > S(1e-12)) {
    out.rotation = reorthonormalize(out.rotation);
  }
  return out;
}

/// (R^T, -R^T t) with frames swapped.
template <typename S>
Pose<S> inverse(const Pose<S>& p) {
  Pose<S> out;
  out.rotation = p.rotation.transpose();
  out.translation = -(out.rotation * p.translation);
  out.to = p.from;
  out.from = p.to;
  return out;
}

/// Eq. (4)-style conversion: re-express a camera-frame pose in the robot
/// base frame given the fixed base<-camera transform.
template <typename S>
Pose<S> camera_to_base(const Pose<S>& base_from_camera, const Pose<S>& camera_from_x) {
  return compose(base_from_camera, camera_from_x);
}

/// One calibration observation: the robot's effector pose, the tool
/// mounting transform, and the camera's view of the tool.
template <typename S>
struct CalibrationSample {
  Pose<S> base_from_effector;   // bTe
  Pose<S> effector_from_tool;   // eTt
  Pose<S> camera_from_tool;     // cTt
};

template <typename S>
struct CalibrationResult {
  Pose<S> base_from_camera;                 // averaged bTc
  std::vector<S> rotation_residual_rad;     // per sample, vs. the mean
  std::vector<S> translation_residual_mm;   // per sample, vs. the mean
  S max_pairwise_rotation_rad = S(0);
  bool consistent = true;                   // false when pairwise spread > 5 deg
};

/// Geodesic angle between two rotations, well conditioned near zero
/// (the trace/acos form loses half the significant digits there).
template <typename S>
S rotation_angle_between(const Mat3<S>& a, const Mat3<S>& b) {
  Quat<S> q(a.transpose() * b);
  return S(2) * std::atan2(q.vec().norm(), std::abs(q.w()));
}

/// Averages per-sample bTc = bTe * eTt * inverse(cTt). Translation is the
/// arithmetic mean; rotation is the normalized quaternion mean with each
/// quaternion sign-aligned to the first sample. Samples whose pairwise
/// rotations spread more than 5 degrees are flagged, not rejected.
template <typename S>
CalibrationResult<S> calibrate_camera_to_base(const std::vector<CalibrationSample<S>>& samples) {
  if (samples.empty()) throw std::invalid_argument("calibration requires at least one sample");

  std::vector<Pose<S>> per_sample;
  per_sample.reserve(samples.size());
  for (const auto& s : samples) {
    per_sample.push_back(compose(compose(s.base_from_effector, s.effector_from_tool),
                                 inverse(s.camera_from_tool)));
  }

  Vec3<S> t_mean = Vec3<S>::Zero();
  Eigen::Matrix<S, 4, 1> q_sum = Eigen::Matrix<S, 4, 1>::Zero();
  Quat<S> q0(per_sample.front().rotation);
  for (const auto& p : per_sample) {
    t_mean += p.translation;
    Quat<S> q(p.rotation);
    if (q.coeffs().dot(q0.coeffs()) < S(0)) q.coeffs() = -q.coeffs();
    q_sum += q.coeffs();
  }
  t_mean /= S(samples.size());
  Quat<S> q_mean;
  q_mean.coeffs() = q_sum.normalized();

  CalibrationResult<S> out;
  out.base_from_camera = {q_mean.toRotationMatrix(), t_mean, Frame::base, Frame::camera};
  for (const auto& p : per_sample) {
    out.rotation_residual_rad.push_back(
        rotation_angle_between(p.rotation, out.base_from_camera.rotation));
    out.translation_residual_mm.push_back((p.translation - t_mean).norm());
  }
  for (size_t i = 0; i < per_sample.size(); ++i) {
    for (size_t j = i + 1; j < per_sample.size(); ++j) {
      out.max_pairwise_rotation_rad = std::max(
          out.max_pairwise_rotation_rad,
          rotation_angle_between(per_sample[i].rotation, per_sample[j].rotation));
    }
  }
  out.consistent = out.max_pairwise_rotation_rad <= S(5) * std::numbers::pi_v<S> / S(180);
  return out;
}

/// Spherical interpolation between unit vectors; tau in [0,1].
template <typename S>
Vec3<S> slerp_unit(const Vec3<S>& u0, const Vec3<S>& u1, S tau) {
  S c = std::clamp(u0.dot(u1), S(-1), S(1));
  S alpha = std::acos(c);
  if (alpha < S(1e-12)) return ((S(1) - tau) * u0 + tau * u1).normalized();
  S sa = std::sin(alpha);
  return (std::sin((S(1) - tau) * alpha) / sa) * u0 + (std::sin(tau * alpha) / sa) * u1;
}

/// Smallest rotation carrying unit vector `from` onto unit vector `to`.
/// The antiparallel case picks a deterministic perpendicular axis.
template <typename S>
Mat3<S> minimal_rotation(const Vec3<S>& from, const Vec3<S>& to) {
  S c = std::clamp(from.dot(to), S(-1), S(1));
  Vec3<S> axis = from.cross(to);
  S s = axis.norm();
  if (s < S(1e-12)) {
    if (c > S(0)) return Mat3<S>::Identity();
    // 180 degrees: rotate about any axis perpendicular to `from`
    int k = 0;
    from.cwiseAbs().minCoeff(&k);
    Vec3<S> perp = from.cross(Vec3<S>::Unit(k)).normalized();
    return Eigen::AngleAxis<S>(std::numbers::pi_v<S>, perp).toRotationMatrix();
  }
  return Eigen::AngleAxis<S>(std::atan2(s, c), axis / s).toRotationMatrix();
}

// Pose <-> (qw,qx,qy,qz, x,y,z) with a canonical quaternion sign so that
// serialized output is reproducible byte for byte.
template <typename S>
Quat<S> canonical_quaternion(const Mat3<S>& r) {
  Quat<S> q(r);
  q.normalize();
  const auto& c = q.coeffs();  // (x,y,z,w)
  S lead = c[3] != S(0) ? c[3] : (c[0] != S(0) ? c[0] : (c[1] != S(0) ? c[1] : c[2]));
  if (lead < S(0)) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace tms
