#include "tms/world.hpp"

#include <cmath>
#include <future>
#include <json.hpp>

#include "tms/csv.hpp"
#include "tms/errors.hpp"

namespace tms {
namespace {

// How far past the planned target the descent may continue while waiting
// for the contact threshold before the run is declared failed.
constexpr double kDescentExtensionMm = 30.0;
constexpr double kRetreatMm = 5.0;
constexpr int kZeroSettleTicks = 250;
constexpr double kRatioForceFloor = 0.5;  // N; below this tau/F is recorded as null
constexpr int kDebounceTicks = 3;
constexpr double kSteadyWindow = 5.0;  // s

struct ResolvedScenario {
  TargetSpec target;
  HeadMotionScript<double> head_motion;
  std::uint64_t seed = 0;
};

ResolvedScenario resolve(const Scene& scene, const Scenario& sc) {
  ResolvedScenario r;
  r.target = sc.target.value_or(scene.target);
  r.head_motion = sc.head_motion.value_or(scene.head_motion);
  r.seed = sc.seed.value_or(scene.seed);
  return r;
}

// The URScript-style compliance parameters scale the plant damping: the
// default pair (gain 1.0, damping 0.1) leaves the scene constants as
// configured; more damping or less gain slows the admittance.
PlantConfig<double> effective_plant(const PlantConfig<double>& plant,
                                    const ComplianceConfig<double>& compliance) {
  PlantConfig<double> p = plant;
  const double scale = (compliance.damping / 0.1) / compliance.force_gain;
  p.translational_damping *= scale;
  p.rotational_damping *= scale;
  return p;
}

class Runner {
 public:
  Runner(const Scene& scene, const Scenario& scenario)
      : scene_(scene),
        scenario_(scenario),
        resolved_(resolve(scene, scenario)),
        rng_(resolved_.seed),
        plant_(effective_plant(scene.plant, scenario.controller.compliance)) {
    sensor_.bias = scene.sensor.bias;
    sensor_.sigma_force = scene.sensor.sigma_force;
    sensor_.sigma_torque = scene.sensor.sigma_torque;
    if (scene.sensor.bias_force_range > 0.0) {
      for (int i = 0; i < 3; ++i) {
        sensor_.bias.force[i] = (2.0 * rng_.uniform() - 1.0) * scene.sensor.bias_force_range;
      }
    }
    if (scene.sensor.bias_torque_range > 0.0) {
      for (int i = 0; i < 3; ++i) {
        sensor_.bias.torque[i] = (2.0 * rng_.uniform() - 1.0) * scene.sensor.bias_torque_range;
      }
    }
    log_.scenario = scenario.name;
    log_.seed = resolved_.seed;
    log_.dt = scene.plant.dt;
    total_ticks_ = static_cast<long>(std::llround(scenario.duration / scene.plant.dt));
  }

  TimeSeriesLog run() {
    if (total_ticks_ <= 0) return log_;  // header-only log
    log_.rows.reserve(static_cast<size_t>(total_ticks_));

    plans_ = plan_approach_resolved();
    x_f_ = plans_.target;
    pose_ = scene_.coil_initial_pose;

    run_plan(plans_.phase1);
    run_plan(plans_.phase2);
    const bool contacted = run_descent(plans_.phase3);
    if (done()) return log_;
    if (!contacted) {
      throw PlanningError("descent ran " + std::to_string(kDescentExtensionMm) +
                          " mm past the target without reaching the contact threshold");
    }
    run_zero_adjust();
    run_force_control();
    return log_;
  }

  ApproachPlans plan_approach_resolved() const {
    ApproachPlans plans;
    plans.guard = SphereGuard<double>::around_head(scene_.head.center(), scene_.head.radius,
                                                   scene_.guard.up, scene_.guard.center_offset,
                                                   scene_.guard.clearance);
    plans.target = resolve_target(scene_, resolved_.target);
    plans.phase1 = plan_phase1(scene_.coil_initial_pose.translation,
                               scene_.coil_initial_pose.rotation, plans.guard, scene_.approach);
    plans.phase2 = plan_phase2(plans.phase1.final_pose().rotation, plans.phase1.x_si,
                               plans.target, plans.guard, scene_.approach);
    plans.phase3 = plan_phase3(plans.phase2.final_pose(), plans.target,
                               scene_.approach.descent_v(), scene_.approach.dt);
    return plans;
  }

 private:
  struct TickSense {
    ContactState<double> contact;
    Wrenchd measured_tool;  // sensor reading, tool frame
  };

  bool done() const { return tick_ >= total_ticks_; }
  double now() const { return static_cast<double>(tick_) * log_.dt; }

  // Contact plus a sensor read at the current state. The sensor reports
  // the wrench the coil transmits into the head (tool frame); its
  // reaction twin is what the plant feels.
  TickSense sense() {
    TickSense s;
    head_pose_ = head_pose_at(resolved_.head_motion, scene_.head.pose, now());
    head_twist_.linear = head_velocity_at(resolved_.head_motion, scene_.head.pose, now());
    HeadModel<double> head_now = scene_.head;
    head_now.pose = head_pose_;
    s.contact = contact_wrench(scene_.coil, pose_, head_now, twist_, head_twist_, scene_.grid);
    Wrenchd true_tool;
    true_tool.force = pose_.rotation.transpose() * s.contact.wrench_on_head.force;
    true_tool.torque = pose_.rotation.transpose() * s.contact.wrench_on_head.torque;
    s.measured_tool = read_wrench(true_tool, sensor_, rng_);
    return s;
  }

  void log_tick(int phase, const TickSense& s, double f_cmd, double e, double e_n, double e_p,
                double theta) {
    LogRow row;
    row.t = now();
    row.phase = phase;
    row.e = e;
    row.e_n = e_n;
    row.e_p = e_p;
    row.theta = theta;
    row.f_cmd = f_cmd;
    row.f_c = s.measured_tool.force.norm();
    row.tau_c = s.measured_tool.torque;
    if (row.f_c >= kRatioForceFloor) {
      row.ratio = Eigen::Vector2d(row.tau_c.x(), row.tau_c.y()).norm() / row.f_c;
    }
    row.in_contact = s.contact.in_contact;
    row.coil_pose = pose_;
    row.head_pose = head_pose_;
    log_.rows.push_back(row);
    ++tick_;
  }

  // Diagnostics channels during the approach: same definitions as under
  // control, evaluated against the planned target.
  void log_approach_tick(int phase, const TickSense& s) {
    const Vec3d axis = coil_axis(pose_);
    F2Result<double> f2 = compute_F2(pose_.translation, x_f_, axis);
    ErrorMetrics<double> m = error_metrics(pose_.translation, x_f_, axis, f2.f2);
    log_tick(phase, s, 0.0, m.e, m.e_n, m.e_p, f2.theta);
  }

  void set_pose_tracking_twist(const Posed& next) {
    twist_.linear = (next.translation - pose_.translation) / log_.dt;
    twist_.angular.setZero();
    pose_ = next;
  }

  // Position-controlled playback of a phase plan; the plant is not in the
  // loop while the robot tracks the approach stiffly.
  void run_plan(const PhasePlan<double>& plan) {
    for (size_t k = 1; k < plan.samples.size() && !done(); ++k) {
      TickSense s = sense();
      log_approach_tick(plan.phase, s);
      set_pose_tracking_twist(plan.samples[k].pose);
    }
  }

  // Phase 3 with contact detection; extends past the plan end if needed.
  bool run_descent(const PhasePlan<double>& plan) {
    const Vec3d dir = coil_axis(plan.final_pose());
    for (size_t k = 1; k < plan.samples.size() && !done(); ++k) {
      TickSense s = sense();
      log_approach_tick(3, s);
      if (detect_contact(s.measured_tool.force, scene_.approach.contact_threshold)) {
        twist_ = {};
        return true;
      }
      set_pose_tracking_twist(plan.samples[k].pose);
    }
    const double step = scene_.approach.descent_v() * log_.dt;
    double extended = 0.0;
    while (!done() && extended < kDescentExtensionMm) {
      TickSense s = sense();
      log_approach_tick(3, s);
      if (detect_contact(s.measured_tool.force, scene_.approach.contact_threshold)) {
        twist_ = {};
        return true;
      }
      Posed next = pose_;
      next.translation += step * dir;
      extended += step;
      set_pose_tracking_twist(next);
    }
    return false;
  }

  // Phase 4: back off 5 mm along the coil axis, average free-space
  // readings into the sensor zero offset, return to the contact pose.
  void run_zero_adjust() {
    const Posed contact_pose = pose_;
    const Vec3d axis = coil_axis(contact_pose);
    const double v = scene_.approach.descent_v();
    const double step = v * log_.dt;

    double out = 0.0;
    while (out < kRetreatMm && !done()) {
      TickSense s = sense();
      log_approach_tick(4, s);
      const double d = std::min(step, kRetreatMm - out);
      Posed next = pose_;
      next.translation -= d * axis;
      out += d;
      set_pose_tracking_twist(next);
    }
    twist_ = {};

    Wrenchd acc;
    int reads = 0;
    sensor_.zero_offset = Wrenchd{};
    for (; reads < kZeroSettleTicks && !done(); ++reads) {
      TickSense s = sense();
      acc.force += s.measured_tool.force;
      acc.torque += s.measured_tool.torque;
      log_approach_tick(4, s);
    }
    if (reads > 0) {
      sensor_.zero_offset.force = acc.force / double(reads);
      sensor_.zero_offset.torque = acc.torque / double(reads);
    }

    double back = out;
    while (back > 0.0 && !done()) {
      TickSense s = sense();
      log_approach_tick(4, s);
      const double d = std::min(step, back);
      Posed next = pose_;
      next.translation += d * axis;
      back -= d;
      set_pose_tracking_twist(next);
    }
    pose_ = contact_pose;  // exact round trip
    twist_ = {};
  }

  void run_force_control() {
    ControllerState<double> state;
    bool retargeted = false;
    while (!done()) {
      if (scenario_.retarget && !retargeted && now() >= scenario_.retarget->time) {
        Vec3d x_f_new;
        if (scenario_.retarget->mode == RetargetEvent::Mode::follow_head) {
          const Vec3d shift = head_pose_at(resolved_.head_motion, scene_.head.pose, now())
                                  .translation -
                              scene_.head.pose.translation;
          x_f_new = plans_.target + shift;
        } else {
          x_f_new = scenario_.retarget->absolute;
        }
        // Swapping in the same point is a no-op; a genuine retarget
        // re-latches e_o, which sends the schedule back to the high
        // plateau.
        if ((x_f_new - x_f_).norm() > 1e-12) {
          x_f_ = x_f_new;
          state.relatch();
        }
        retargeted = true;
      }

      TickSense s = sense();
      const Vec3d axis = coil_axis(pose_);
      ControllerOutput<double> out = controller_tick(state, pose_.translation, x_f_, axis,
                                                     s.measured_tool, scenario_.controller);
      log_tick(5, s, out.magnitude, out.metrics.e, out.metrics.e_n, out.metrics.e_p, out.theta);

      HeadModel<double> head_now = scene_.head;
      head_now.pose = head_pose_;
      PlantStep<double> step = step_plant(pose_, twist_, out.force, out.torque_tool, scene_.coil,
                                          head_now, head_twist_, plant_, scene_.grid);
      pose_ = step.pose;
      twist_ = step.twist;
    }
  }

  const Scene& scene_;
  const Scenario& scenario_;
  ResolvedScenario resolved_;
  GaussianRng rng_;
  PlantConfig<double> plant_;
  SensorModel<double> sensor_;
  ApproachPlans plans_;
  TimeSeriesLog log_;
  Posed pose_{};
  Posed head_pose_{};
  Twist<double> twist_{};
  Twist<double> head_twist_{};
  Vec3d x_f_ = Vec3d::Zero();
  long tick_ = 0;
  long total_ticks_ = 0;
};

}  // namespace

ApproachPlans plan_approach(const Scene& scene, const TargetSpec& target) {
  Scenario dummy;
  Scene s = scene;
  s.target = target;
  return Runner(s, dummy).plan_approach_resolved();
}

TimeSeriesLog run_scenario(const Scene& scene, const Scenario& scenario) {
  scene.validate();
  scenario.validate();
  return Runner(scene, scenario).run();
}

namespace {

// Counts time inside the "above" state with 3-tick hysteresis on both
// edges.
double debounced_time_above(const TimeSeriesLog& log, double threshold) {
  bool above = false;
  int run = 0;
  long ticks_above = 0;
  for (const auto& row : log.rows) {
    const bool raw = row.f_c > threshold;
    if (raw != above) {
      if (++run >= kDebounceTicks) {
        above = raw;
        run = 0;
        if (above) ticks_above += kDebounceTicks;  // count the qualifying run
      }
    } else {
      run = 0;
      if (above) ++ticks_above;
    }
  }
  return double(ticks_above) * log.dt;
}

std::optional<double> first_time_below(const TimeSeriesLog& log, double threshold) {
  int run = 0;
  for (const auto& row : log.rows) {
    if (row.phase != 5) continue;
    if (row.e < threshold) {
      if (++run >= kDebounceTicks) return row.t - (kDebounceTicks - 1) * log.dt;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

}  // namespace

SummaryMetrics summarize(const TimeSeriesLog& log) {
  SummaryMetrics m;
  if (log.rows.empty()) return m;

  const double t_end = log.rows.back().t;
  const double steady_from = t_end - kSteadyWindow;
  double e_sum = 0.0, ratio_sum = 0.0;
  long e_count = 0, ratio_count = 0;
  for (const auto& row : log.rows) {
    if (row.t < steady_from) continue;
    e_sum += row.e;
    ++e_count;
    if (row.ratio) {
      ratio_sum += *row.ratio;
      ++ratio_count;
    }
  }
  if (e_count > 0) m.e_converged = e_sum / double(e_count);
  if (ratio_count > 0) m.steady_ratio = ratio_sum / double(ratio_count);

  m.t_below_5mm = first_time_below(log, 5.0);
  m.t_above_20N = debounced_time_above(log, 20.0);

  // The motion window is recovered from the logged head poses, so
  // re-summarizing a CSV needs no scenario context.
  bool any_motion = false;
  double min_fc = 0.0;
  for (size_t k = 1; k < log.rows.size(); ++k) {
    const double moved =
        (log.rows[k].head_pose.translation - log.rows[k - 1].head_pose.translation).norm();
    if (moved > 1e-12) {
      if (!any_motion || log.rows[k].f_c < min_fc) min_fc = log.rows[k].f_c;
      any_motion = true;
    }
  }
  if (any_motion) m.min_fc_during_motion = min_fc;

  for (const auto& row : log.rows) {
    if (row.phase == 4 && !m.t_contact) m.t_contact = row.t;
    if (row.phase == 5) {
      if (!m.t_control_start) {
        m.t_control_start = row.t;
        m.e_o = row.e;
      }
    }
  }
  m.e_final = log.rows.back().e;
  return m;
}

std::vector<SweepPoint> run_sweep(const Scene& scene, const Scenario& base, SweepAxis axis,
                                  const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepPoint> out(values.size());
  std::vector<std::future<TimeSeriesLog>> jobs;
  jobs.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    Scenario sc = base;
    if (axis == SweepAxis::force) {
      if (values[i] < 0) throw ConfigError("desired force must be non-negative");
      sc.controller.magnitude_mode = MagnitudeMode::fixed;
      sc.controller.fixed_force = values[i];
      sc.name = base.name + "/force_" + format_double(values[i]);
    } else {
      if (values[i] < 0) throw ConfigError("k_p must be non-negative");
      sc.controller.k_p = values[i];
      sc.name = base.name + "/kp_" + format_double(values[i]);
    }
    out[i].value = values[i];
    out[i].name = sc.name;
    jobs.push_back(std::async(std::launch::async,
                              [&scene, sc]() { return run_scenario(scene, sc); }));
  }
  for (size_t i = 0; i < values.size(); ++i) {
    out[i].log = jobs[i].get();
    out[i].metrics = summarize(out[i].log);
  }
  return out;
}

std::string summary_to_json(const SummaryMetrics& m, const std::string& scenario,
                            std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["schema"] = "tms-summary/1";
  j["scenario"] = scenario;
  j["seed"] = seed;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    } else {
      j[key] = nullptr;
    }
  };
  put("e_converged_mm", m.e_converged);
  put("t_below_5mm_s", m.t_below_5mm);
  put("t_above_20N_s", m.t_above_20N);
  put("steady_ratio_mm", m.steady_ratio);
  put("min_fc_during_motion_N", m.min_fc_during_motion);
  put("t_contact_s", m.t_contact);
  put("t_control_start_s", m.t_control_start);
  put("e_o_mm", m.e_o);
  put("e_final_mm", m.e_final);
  return j.dump(2) + "\n";
}

}  // namespace tms
