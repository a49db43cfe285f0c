#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tms/contact.hpp"
#include "tms/controller.hpp"
#include "tms/motion.hpp"
#include "tms/sensor.hpp"
#include "tms/trajectory.hpp"

namespace tms {

/// Where on the head sphere the coil should end up. Spherical coordinates
/// in the head frame plus two error knobs: a radial offset (navigation
/// estimates above/inside the scalp) and a free world-frame offset.
struct TargetSpec {
  double polar_deg = 45.0;    // from head +z
  double azimuth_deg = 45.0;  // from head +x toward +y
  double surface_offset = 0.0;           // mm along the outward radial
  Vec3d world_offset = Vec3d::Zero();    // mm, base frame
};

struct SensorSpec {
  Wrenchd bias{};               // used as-is when the ranges are zero
  double bias_force_range = 0.0;   // >0: draw each force component in [-r, r]
  double bias_torque_range = 0.0;  // >0: draw each torque component in [-r, r]
  double sigma_force = 0.2;     // N
  double sigma_torque = 5.0;    // N*mm
};

struct GuardSpec {
  Vec3d up = Vec3d::UnitZ();
  double center_offset = 25.0;  // mm above the head center
  double clearance = 30.0;      // guard radius = head radius + clearance
};

/// Everything physical: models, sensor, plant, approach limits, target
/// and the default head-motion script. The seed governs every random
/// draw of a run.
struct Scene {
  std::uint64_t seed = 1;
  HeadModel<double> head{};
  CoilModel<double> coil{};
  Posed coil_initial_pose{};
  SensorSpec sensor{};
  PlantConfig<double> plant{};
  PatchGrid grid{};
  GuardSpec guard{};
  ApproachLimits<double> approach{};
  TargetSpec target{};
  HeadMotionScript<double> head_motion{};

  void validate() const;
};

/// When and where to swap the controller's target mid-run (§V-style
/// tracking). `follow_head` re-derives the target from the moved head.
struct RetargetEvent {
  enum class Mode { follow_head, absolute };
  double time = 0.0;
  Mode mode = Mode::follow_head;
  Vec3d absolute = Vec3d::Zero();
};

/// One experiment: a controller variant with a duration and optional
/// overrides of the scene's target, motion script and seed.
struct Scenario {
  std::string name = "scenario";
  std::string scene_path;  // optional; CLI arguments win
  double duration = 60.0;
  ControllerConfig<double> controller{};
  std::optional<TargetSpec> target;
  std::optional<HeadMotionScript<double>> head_motion;
  std::optional<std::uint64_t> seed;
  std::optional<RetargetEvent> retarget;

  void validate() const;
};

// JSON round trips. Schemas are versioned ("tms-scene/1", "tms-scenario/1",
// "tms-cal/1"); loading rejects unknown schema strings.
Scene load_scene(const std::filesystem::path& file);
Scenario load_scenario(const std::filesystem::path& file);
std::string scene_to_json(const Scene& s);
std::string scenario_to_json(const Scenario& s);
Scene scene_from_json(const std::string& text);
Scenario scenario_from_json(const std::string& text);

std::vector<CalibrationSample<double>> load_calibration_samples(
    const std::filesystem::path& file);
std::string calibration_result_to_json(const CalibrationResult<double>& r);

/// The point the approach and controller aim for, derived from the head
/// pose at t = 0.
Vec3d resolve_target(const Scene& scene, const TargetSpec& spec);

}  // namespace tms
