#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tms/scene.hpp"

namespace tms {

/// One control-period record of everything the paper's figures plot.
struct LogRow {
  double t = 0.0;
  int phase = 0;  // 1..4 approach phases, 5 = force/torque control
  double e = 0.0, e_n = 0.0, e_p = 0.0, theta = 0.0;
  double f_cmd = 0.0;               // commanded magnitude F, N (0 before control)
  double f_c = 0.0;                 // measured force norm, N
  Vec3d tau_c = Vec3d::Zero();      // measured torque, tool frame, N*mm
  std::optional<double> ratio;     // |(tau_x, tau_y)| / F_c; null when F_c < 0.5 N
  bool in_contact = false;
  Posed coil_pose{};
  Posed head_pose{};
};

struct TimeSeriesLog {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.002;
  std::vector<LogRow> rows;
};

/// Figures of merit reported per run; null when the underlying event
/// never happened. Threshold crossings are debounced over three
/// consecutive ticks; "steady" means the final five seconds.
struct SummaryMetrics {
  std::optional<double> e_converged;         // mean e over the final 5 s, mm
  std::optional<double> t_below_5mm;         // first control time with e < 5 mm, s
  std::optional<double> t_above_20N;         // total time with F_c > 20 N, s
  std::optional<double> steady_ratio;        // mean tau_c/F_c over the final 5 s, mm
  std::optional<double> min_fc_during_motion;  // N; null when the head never moves
  // run diagnostics
  std::optional<double> t_contact;        // phase-3 contact detection time, s
  std::optional<double> t_control_start;  // first force-control tick, s
  std::optional<double> e_o;              // latched initial error, mm
  std::optional<double> e_final;          // e at the last row, mm
};

struct ApproachPlans {
  PhasePlan<double> phase1, phase2, phase3;
  SphereGuard<double> guard{};
  Vec3d target = Vec3d::Zero();
};

/// Plans phases 1-3 for the scene's (or overridden) target. Throws
/// PlanningError when the geometry admits no plan.
ApproachPlans plan_approach(const Scene& scene, const TargetSpec& target);

/// Full pipeline: approach phases 1-4 followed by force/torque control,
/// deterministic for a given (scene, scenario) pair.
TimeSeriesLog run_scenario(const Scene& scene, const Scenario& scenario);

SummaryMetrics summarize(const TimeSeriesLog& log);

enum class SweepAxis { force, kp };

struct SweepPoint {
  double value = 0.0;
  std::string name;
  TimeSeriesLog log;
  SummaryMetrics metrics;
};

/// One run per value (fixed desired force or torque gain), shared seed,
/// executed on parallel worlds and returned in sweep order.
std::vector<SweepPoint> run_sweep(const Scene& scene, const Scenario& base, SweepAxis axis,
                                  const std::vector<double>& values);

std::string summary_to_json(const SummaryMetrics& m, const std::string& scenario,
                            std::uint64_t seed);

}  // namespace tms
