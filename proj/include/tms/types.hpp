#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

// Units used throughout: millimeters, Newtons, Newton-millimeters,
// seconds, radians. Degrees appear only at CLI/config boundaries.

namespace tms {

template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S> using Vec6 = Eigen::Matrix<S, 6, 1>;
template <typename S> using Quat = Eigen::Quaternion<S>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Vec6d = Vec6<double>;
using Quatd = Quat<double>;

/// A force/torque pair. The torque frame depends on context and is
/// documented at each use site.
template <typename S>
struct Wrench {
  Vec3<S> force = Vec3<S>::Zero();    // N
  Vec3<S> torque = Vec3<S>::Zero();   // N*mm

  Vec6<S> as_vector() const {
    Vec6<S> v;
    v << force, torque;
    return v;
  }
  static Wrench from_vector(const Vec6<S>& v) {
    return {v.template head<3>(), v.template tail<3>()};
  }

  Wrench operator+(const Wrench& o) const { return {force + o.force, torque + o.torque}; }
  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
  Wrench operator-() const { return {-force, -torque}; }
};

using Wrenchd = Wrench<double>;

}  // namespace tms
