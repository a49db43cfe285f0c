#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

#include "tms/geometry.hpp"
#include "tms/types.hpp"

namespace tms {

/// Gaussian sampler on top of mt19937_64 via Box-Muller. Implemented here
/// instead of std::normal_distribution so that a given seed yields the
/// same byte-identical logs on every standard library.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian(double sigma) {
    if (sigma <= 0.0) return 0.0;
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Wrist force/torque sensor: constant bias, white noise, and a zero
/// offset captured during the phase-4 adjustment.
template <typename S>
struct SensorModel {
  Wrench<S> bias{};          // N, N*mm
  S sigma_force = S(0.2);    // N, per axis
  S sigma_torque = S(5);     // N*mm, per axis
  Wrench<S> zero_offset{};   // captured by phase 4
};

/// measured = true + bias - zero_offset + gaussian noise.
template <typename S>
Wrench<S> read_wrench(const Wrench<S>& true_wrench, const SensorModel<S>& sensor,
                      GaussianRng& rng) {
  Wrench<S> m;
  for (int i = 0; i < 3; ++i) {
    m.force[i] = true_wrench.force[i] + sensor.bias.force[i] - sensor.zero_offset.force[i] +
                 S(rng.gaussian(double(sensor.sigma_force)));
  }
  for (int i = 0; i < 3; ++i) {
    m.torque[i] = true_wrench.torque[i] + sensor.bias.torque[i] - sensor.zero_offset.torque[i] +
                  S(rng.gaussian(double(sensor.sigma_torque)));
  }
  return m;
}

/// Phase 4: retreat `retreat_mm` along the negative coil axis, capture
/// the free-space reading (averaged over `settle_reads` samples) as the
/// sensor zero offset, and return to the contact pose. `true_wrench_at`
/// supplies the physical wrench at a pose; it is expected to be zero at
/// the retreat point.
template <typename S, typename TrueWrenchFn>
Pose<S> phase4_zero_adjust(const Pose<S>& contact_pose, S retreat_mm, SensorModel<S>& sensor,
                           GaussianRng& rng, TrueWrenchFn&& true_wrench_at,
                           int settle_reads = 250) {
  Pose<S> retreat = contact_pose;
  retreat.translation -= retreat_mm * coil_axis(contact_pose);

  sensor.zero_offset = Wrench<S>{};  // capture raw readings
  Wrench<S> acc{};
  const Wrench<S> true_wrench = true_wrench_at(retreat);
  for (int i = 0; i < settle_reads; ++i) {
    Wrench<S> r = read_wrench(true_wrench, sensor, rng);
    acc.force += r.force;
    acc.torque += r.torque;
  }
  sensor.zero_offset.force = acc.force / S(settle_reads);
  sensor.zero_offset.torque = acc.torque / S(settle_reads);
  return contact_pose;
}

}  // namespace tms
