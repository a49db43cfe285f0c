#include "tms/scene.hpp"

#include <fstream>
#include <json.hpp>

#include "tms/errors.hpp"

namespace tms {
namespace {

using json = nlohmann::ordered_json;

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return j;
}

void expect_schema(const json& j, const std::string& want, const std::string& what) {
  const std::string got = j.value("schema", "");
  if (got != want) {
    throw ConfigError(what + ": expected schema \"" + want + "\", got \"" + got + "\"");
  }
}

Vec3d vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Posed pose_from(const json& j, const char* what) {
  Posed p;
  if (j.contains("q")) {
    const auto& q = j.at("q");
    if (!q.is_array() || q.size() != 4) {
      throw ConfigError(std::string(what) + ".q must be [w, x, y, z]");
    }
    Quatd quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    if (quat.norm() < 1e-9) throw ConfigError(std::string(what) + ".q is degenerate");
    quat.normalize();
    p.rotation = quat.toRotationMatrix();
  }
  if (j.contains("t")) p.translation = vec3_from(j.at("t"), what);
  return p;
}

json pose_to(const Posed& p) {
  Quatd q = canonical_quaternion(p.rotation);
  return json{{"q", json::array({q.w(), q.x(), q.y(), q.z()})}, {"t", vec3_to(p.translation)}};
}

HeadMotionScript<double> script_from(const json& j) {
  HeadMotionScript<double> s;
  const std::string type = j.value("type", "fixed");
  if (type == "fixed") {
    s.type = HeadMotionScript<double>::Type::fixed;
  } else if (type == "ramp") {
    s.type = HeadMotionScript<double>::Type::ramp;
    s.start_time = j.value("start", 0.0);
    if (!j.contains("legs")) throw ConfigError("ramp script needs \"legs\"");
    for (const auto& lj : j.at("legs")) {
      HeadMotionScript<double>::Leg leg;
      leg.axis = vec3_from(lj.at("axis"), "leg.axis");
      leg.distance = lj.at("distance").get<double>();
      leg.speed = lj.at("speed").get<double>();
      s.legs.push_back(leg);
    }
  } else if (type == "steps") {
    s.type = HeadMotionScript<double>::Type::steps;
    if (!j.contains("steps")) throw ConfigError("step script needs \"steps\"");
    for (const auto& sj : j.at("steps")) {
      HeadMotionScript<double>::Step st;
      st.time = sj.at("t").get<double>();
      st.offset = vec3_from(sj.at("offset"), "step.offset");
      s.steps.push_back(st);
    }
  } else {
    throw ConfigError("unknown head-motion script type \"" + type + "\"");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json script_to(const HeadMotionScript<double>& s) {
  using Type = HeadMotionScript<double>::Type;
  if (s.type == Type::fixed) return json{{"type", "fixed"}};
  if (s.type == Type::ramp) {
    json legs = json::array();
    for (const auto& l : s.legs) {
      legs.push_back({{"axis", vec3_to(l.axis)}, {"distance", l.distance}, {"speed", l.speed}});
    }
    return json{{"type", "ramp"}, {"start", s.start_time}, {"legs", legs}};
  }
  json steps = json::array();
  for (const auto& st : s.steps) {
    steps.push_back({{"t", st.time}, {"offset", vec3_to(st.offset)}});
  }
  return json{{"type", "steps"}, {"steps", steps}};
}

TargetSpec target_from(const json& j) {
  TargetSpec t;
  t.polar_deg = j.value("polar_deg", t.polar_deg);
  t.azimuth_deg = j.value("azimuth_deg", t.azimuth_deg);
  t.surface_offset = j.value("surface_offset", t.surface_offset);
  if (j.contains("world_offset")) t.world_offset = vec3_from(j.at("world_offset"), "world_offset");
  return t;
}

json target_to(const TargetSpec& t) {
  return json{{"polar_deg", t.polar_deg},
              {"azimuth_deg", t.azimuth_deg},
              {"surface_offset", t.surface_offset},
              {"world_offset", vec3_to(t.world_offset)}};
}

ControllerConfig<double> controller_from(const json& j) {
  ControllerConfig<double> c;
  const std::string mode = j.value("mode", "hybrid");
  if (mode == "hybrid") {
    c.force_mode = ForceMode::hybrid;
  } else if (mode == "pure") {
    c.force_mode = ForceMode::pure;
  } else {
    throw ConfigError("controller.mode must be \"hybrid\" or \"pure\"");
  }
  if (j.contains("magnitude")) {
    const auto& m = j.at("magnitude");
    if (m.is_string() && m.get<std::string>() == "scheduled") {
      c.magnitude_mode = MagnitudeMode::scheduled;
    } else if (m.is_number()) {
      c.magnitude_mode = MagnitudeMode::fixed;
      c.fixed_force = m.get<double>();
      if (c.fixed_force < 0) throw ConfigError("fixed force must be non-negative");
    } else {
      throw ConfigError("controller.magnitude must be \"scheduled\" or a number of Newtons");
    }
  }
  c.k_p = j.value("k_p", c.k_p);
  if (c.k_p < 0) throw ConfigError("k_p must be non-negative");
  const std::string sign = j.value("f2_sign", "error");
  if (sign == "error") {
    c.f2_sign = F2Sign::error;
  } else if (sign == "paper") {
    c.f2_sign = F2Sign::paper;
  } else {
    throw ConfigError("controller.f2_sign must be \"error\" or \"paper\"");
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    c.schedule.f_hi = s.value("f_hi", c.schedule.f_hi);
    c.schedule.f_lo = s.value("f_lo", c.schedule.f_lo);
    c.schedule.hi_frac = s.value("hi_frac", c.schedule.hi_frac);
    c.schedule.lo_frac = s.value("lo_frac", c.schedule.lo_frac);
    c.schedule.slope = s.value("slope", c.schedule.slope);
    c.schedule.offset = s.value("offset", c.schedule.offset);
    if (!c.schedule.continuous()) {
      throw ConfigError("force schedule constants are inconsistent at the knees");
    }
  }
  if (j.contains("compliance")) {
    const auto& k = j.at("compliance");
    c.compliance.force_gain = k.value("force_gain", c.compliance.force_gain);
    c.compliance.damping = k.value("damping", c.compliance.damping);
    if (!(c.compliance.damping > 0.0) || c.compliance.damping > 1.0) {
      throw ConfigError("compliance damping must lie in (0, 1]");
    }
    if (!(c.compliance.force_gain > 0.0)) throw ConfigError("force gain must be positive");
  }
  return c;
}

json controller_to(const ControllerConfig<double>& c) {
  json j;
  j["mode"] = c.force_mode == ForceMode::hybrid ? "hybrid" : "pure";
  if (c.magnitude_mode == MagnitudeMode::scheduled) {
    j["magnitude"] = "scheduled";
  } else {
    j["magnitude"] = c.fixed_force;
  }
  j["k_p"] = c.k_p;
  j["f2_sign"] = c.f2_sign == F2Sign::error ? "error" : "paper";
  j["schedule"] = {{"f_hi", c.schedule.f_hi},       {"f_lo", c.schedule.f_lo},
                   {"hi_frac", c.schedule.hi_frac}, {"lo_frac", c.schedule.lo_frac},
                   {"slope", c.schedule.slope},     {"offset", c.schedule.offset}};
  j["compliance"] = {{"force_gain", c.compliance.force_gain},
                     {"damping", c.compliance.damping}};
  return j;
}

Wrenchd wrench_from(const json& j, const char* what) {
  Wrenchd w;
  if (j.contains("force")) w.force = vec3_from(j.at("force"), what);
  if (j.contains("torque")) w.torque = vec3_from(j.at("torque"), what);
  return w;
}

}  // namespace

void Scene::validate() const {
  if (head.radius <= 0 || head.mu < 0 || head.k_n <= 0 || head.b_n < 0) {
    throw ConfigError("head model parameters out of range");
  }
  try {
    coil.validate(head.radius);
    plant.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(approach.v_max > 0) || !(approach.accel > 0) || !(approach.ang_v_max > 0) ||
      !(approach.ang_accel > 0)) {
    throw ConfigError("approach limits must be positive");
  }
  if (!(approach.contact_threshold > 0)) throw ConfigError("contact threshold must be positive");
  if (grid.rings < 8) throw ConfigError("patch_rings must be at least 8");
  if (!is_rotation(coil_initial_pose.rotation, 1e-6)) {
    throw ConfigError("coil initial pose rotation is not orthonormal");
  }
  if (!is_rotation(head.pose.rotation, 1e-6)) {
    throw ConfigError("head pose rotation is not orthonormal");
  }
  if (sensor.sigma_force < 0 || sensor.sigma_torque < 0 || sensor.bias_force_range < 0 ||
      sensor.bias_torque_range < 0) {
    throw ConfigError("sensor noise parameters must be non-negative");
  }
  try {
    (void)SphereGuard<double>::around_head(head.center(), head.radius, guard.up,
                                           guard.center_offset, guard.clearance);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void Scenario::validate() const {
  if (!(duration >= 0)) throw ConfigError("scenario duration must be non-negative");
  if (retarget && retarget->time < 0) throw ConfigError("retarget time must be non-negative");
}

Scene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  expect_schema(j, "tms-scene/1", "scene");

  Scene s;
  s.seed = j.value("seed", s.seed);
  if (j.contains("head")) {
    const auto& h = j.at("head");
    if (h.contains("pose")) s.head.pose = pose_from(h.at("pose"), "head.pose");
    s.head.pose.to = Frame::base;
    s.head.pose.from = Frame::head;
    s.head.radius = h.value("radius", s.head.radius);
    s.head.mu = h.value("mu", s.head.mu);
    s.head.k_n = h.value("k_n", s.head.k_n);
    s.head.b_n = h.value("b_n", s.head.b_n);
    s.head.friction_viscous_cap = h.value("friction_viscous_cap", s.head.friction_viscous_cap);
  }
  if (j.contains("coil")) {
    const auto& c = j.at("coil");
    s.coil.floor_radius = c.value("floor_radius", s.coil.floor_radius);
    if (c.contains("rim_aperture_deg")) {
      s.coil.rim_aperture = c.at("rim_aperture_deg").get<double>() * std::numbers::pi / 180.0;
    }
    if (c.contains("initial_pose")) {
      s.coil_initial_pose = pose_from(c.at("initial_pose"), "coil.initial_pose");
    }
    s.coil_initial_pose.to = Frame::base;
    s.coil_initial_pose.from = Frame::tool;
  }
  if (j.contains("sensor")) {
    const auto& n = j.at("sensor");
    if (n.contains("bias")) s.sensor.bias = wrench_from(n.at("bias"), "sensor.bias");
    s.sensor.bias_force_range = n.value("bias_force_range", s.sensor.bias_force_range);
    s.sensor.bias_torque_range = n.value("bias_torque_range", s.sensor.bias_torque_range);
    s.sensor.sigma_force = n.value("sigma_force", s.sensor.sigma_force);
    s.sensor.sigma_torque = n.value("sigma_torque", s.sensor.sigma_torque);
  }
  if (j.contains("plant")) {
    const auto& p = j.at("plant");
    s.plant.translational_damping =
        p.value("translational_damping", s.plant.translational_damping);
    s.plant.rotational_damping = p.value("rotational_damping", s.plant.rotational_damping);
    s.plant.dt = p.value("dt", s.plant.dt);
  }
  s.grid.rings = j.value("patch_rings", s.grid.rings);
  if (j.contains("guard")) {
    const auto& g = j.at("guard");
    if (g.contains("up")) s.guard.up = vec3_from(g.at("up"), "guard.up");
    s.guard.center_offset = g.value("center_offset", s.guard.center_offset);
    s.guard.clearance = g.value("clearance", s.guard.clearance);
  }
  if (j.contains("approach")) {
    const auto& a = j.at("approach");
    s.approach.v_max = a.value("v_max", s.approach.v_max);
    s.approach.accel = a.value("accel", s.approach.accel);
    s.approach.ang_v_max = a.value("ang_v_max", s.approach.ang_v_max);
    s.approach.ang_accel = a.value("ang_accel", s.approach.ang_accel);
    s.approach.descent_velocity = a.value("descent_velocity", s.approach.descent_velocity);
    s.approach.contact_threshold = a.value("contact_threshold", s.approach.contact_threshold);
  }
  s.approach.dt = s.plant.dt;  // one control period for the whole run
  if (j.contains("target")) s.target = target_from(j.at("target"));
  if (j.contains("head_motion")) s.head_motion = script_from(j.at("head_motion"));
  s.validate();
  return s;
}

Scene load_scene(const std::filesystem::path& file) {
  return scene_from_json(read_json_file(file).dump());
}

std::string scene_to_json(const Scene& s) {
  json j;
  j["schema"] = "tms-scene/1";
  j["seed"] = s.seed;
  j["head"] = {{"pose", pose_to(s.head.pose)},
               {"radius", s.head.radius},
               {"mu", s.head.mu},
               {"k_n", s.head.k_n},
               {"b_n", s.head.b_n},
               {"friction_viscous_cap", s.head.friction_viscous_cap}};
  j["coil"] = {{"floor_radius", s.coil.floor_radius},
               {"rim_aperture_deg", s.coil.rim_aperture * 180.0 / std::numbers::pi},
               {"initial_pose", pose_to(s.coil_initial_pose)}};
  j["sensor"] = {{"bias", {{"force", vec3_to(s.sensor.bias.force)},
                           {"torque", vec3_to(s.sensor.bias.torque)}}},
                 {"bias_force_range", s.sensor.bias_force_range},
                 {"bias_torque_range", s.sensor.bias_torque_range},
                 {"sigma_force", s.sensor.sigma_force},
                 {"sigma_torque", s.sensor.sigma_torque}};
  j["plant"] = {{"translational_damping", s.plant.translational_damping},
                {"rotational_damping", s.plant.rotational_damping},
                {"dt", s.plant.dt}};
  j["patch_rings"] = s.grid.rings;
  j["guard"] = {{"up", vec3_to(s.guard.up)},
                {"center_offset", s.guard.center_offset},
                {"clearance", s.guard.clearance}};
  j["approach"] = {{"v_max", s.approach.v_max},
                   {"accel", s.approach.accel},
                   {"ang_v_max", s.approach.ang_v_max},
                   {"ang_accel", s.approach.ang_accel},
                   {"descent_velocity", s.approach.descent_velocity},
                   {"contact_threshold", s.approach.contact_threshold}};
  j["target"] = target_to(s.target);
  j["head_motion"] = script_to(s.head_motion);
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  expect_schema(j, "tms-scenario/1", "scenario");

  Scenario s;
  s.name = j.value("name", s.name);
  s.scene_path = j.value("scene", s.scene_path);
  s.duration = j.value("duration", s.duration);
  if (j.contains("controller")) s.controller = controller_from(j.at("controller"));
  if (j.contains("target")) s.target = target_from(j.at("target"));
  if (j.contains("head_motion")) s.head_motion = script_from(j.at("head_motion"));
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("retarget")) {
    const auto& r = j.at("retarget");
    RetargetEvent ev;
    ev.time = r.at("time").get<double>();
    if (r.contains("mode") && r.at("mode").is_array()) {
      ev.mode = RetargetEvent::Mode::absolute;
      ev.absolute = vec3_from(r.at("mode"), "retarget.mode");
    } else {
      const std::string mode = r.value("mode", "follow_head");
      if (mode == "follow_head") {
        ev.mode = RetargetEvent::Mode::follow_head;
      } else {
        throw ConfigError("retarget.mode must be \"follow_head\" or an [x, y, z] point");
      }
    }
    s.retarget = ev;
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  return scenario_from_json(read_json_file(file).dump());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema"] = "tms-scenario/1";
  j["name"] = s.name;
  if (!s.scene_path.empty()) j["scene"] = s.scene_path;
  j["duration"] = s.duration;
  j["controller"] = controller_to(s.controller);
  if (s.target) j["target"] = target_to(*s.target);
  if (s.head_motion) j["head_motion"] = script_to(*s.head_motion);
  if (s.seed) j["seed"] = *s.seed;
  if (s.retarget) {
    json r;
    r["time"] = s.retarget->time;
    if (s.retarget->mode == RetargetEvent::Mode::follow_head) {
      r["mode"] = "follow_head";
    } else {
      r["mode"] = vec3_to(s.retarget->absolute);
    }
    j["retarget"] = r;
  }
  return j.dump(2) + "\n";
}

std::vector<CalibrationSample<double>> load_calibration_samples(
    const std::filesystem::path& file) {
  json j = read_json_file(file);
  expect_schema(j, "tms-cal/1", "calibration samples");
  if (!j.contains("samples") || !j.at("samples").is_array() || j.at("samples").empty()) {
    throw ConfigError("calibration file holds no samples");
  }
  std::vector<CalibrationSample<double>> out;
  for (const auto& sj : j.at("samples")) {
    CalibrationSample<double> s;
    s.base_from_effector = pose_from(sj.at("bTe"), "bTe");
    s.base_from_effector.to = Frame::base;
    s.base_from_effector.from = Frame::effector;
    s.effector_from_tool = pose_from(sj.at("eTt"), "eTt");
    s.effector_from_tool.to = Frame::effector;
    s.effector_from_tool.from = Frame::tool;
    s.camera_from_tool = pose_from(sj.at("cTt"), "cTt");
    s.camera_from_tool.to = Frame::camera;
    s.camera_from_tool.from = Frame::tool;
    if (!is_rotation(s.base_from_effector.rotation, 1e-6) ||
        !is_rotation(s.effector_from_tool.rotation, 1e-6) ||
        !is_rotation(s.camera_from_tool.rotation, 1e-6)) {
      throw ConfigError("calibration sample holds a non-orthonormal rotation");
    }
    out.push_back(s);
  }
  return out;
}

std::string calibration_result_to_json(const CalibrationResult<double>& r) {
  json j;
  j["schema"] = "tms-cal-result/1";
  j["base_from_camera"] = pose_to(r.base_from_camera);
  j["rotation_residual_rad"] = r.rotation_residual_rad;
  j["translation_residual_mm"] = r.translation_residual_mm;
  j["max_pairwise_rotation_deg"] = r.max_pairwise_rotation_rad * 180.0 / std::numbers::pi;
  j["consistent"] = r.consistent;
  return j.dump(2) + "\n";
}

Vec3d resolve_target(const Scene& scene, const TargetSpec& spec) {
  const double polar = spec.polar_deg * std::numbers::pi / 180.0;
  const double azimuth = spec.azimuth_deg * std::numbers::pi / 180.0;
  const Vec3d radial_head(std::sin(polar) * std::cos(azimuth),
                          std::sin(polar) * std::sin(azimuth), std::cos(polar));
  const Vec3d radial = scene.head.pose.rotation * radial_head;
  return scene.head.center() + (scene.head.radius + spec.surface_offset) * radial +
         spec.world_offset;
}

}  // namespace tms
