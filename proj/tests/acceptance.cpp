// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number
// of failed criteria.
//
//   acceptance --cli <path to tms_sim> --configs <dir> --out <dir>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tms/contact.hpp"
#include "tms/controller.hpp"
#include "tms/csv.hpp"
#include "tms/scene.hpp"
#include "tms/sensor.hpp"
#include "tms/trajectory.hpp"
#include "tms/world.hpp"

using namespace tms;
namespace fs = std::filesystem;

namespace {

std::string g_cli, g_configs, g_out;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

#define REQUIRE_OK(cond, message)                        \
  do {                                                   \
    if (!(cond)) return std::string(message);            \
  } while (0)

// --- criterion 1 ------------------------------------------------------

std::string criterion_schedule() {
  const auto t0 = std::chrono::steady_clock::now();
  for (double e_o : {50.0, 1.0, 2.0, 10.0, 400.0}) {
    REQUIRE_OK(schedule_force(0.2 * e_o, e_o) == 40.0,
               "schedule(0.2*e_o) != 40 exactly at e_o=" + fmt(e_o));
    REQUIRE_OK(schedule_force(0.1 * e_o, e_o) == 5.0,
               "schedule(0.1*e_o) != 5 exactly at e_o=" + fmt(e_o));
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ueo(0.01, 1000.0), ueps(0.0, 1.0);
  double max_gap = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double e_o = ueo(rng);
    const double knee = (i & 1 ? 0.2 : 0.1) * e_o;
    const double eps = 1e-12 * e_o * ueps(rng);
    const double lo = schedule_force(std::max(0.0, knee - eps), e_o);
    const double hi = schedule_force(knee + eps, e_o);
    max_gap = std::max(max_gap, std::abs(hi - lo));
  }
  REQUIRE_OK(max_gap < 1e-9, "continuity gap " + fmt(max_gap) + " N");
  const double elapsed = seconds_since(t0);
  REQUIRE_OK(elapsed < 1.0, "runtime " + fmt(elapsed) + " s exceeds 1 s");
  return "";
}

// --- criterion 2 ------------------------------------------------------

std::string criterion_hybrid_force() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> uf(0.0, 60.0), ux(-200.0, 200.0);
  for (int i = 0; i < 100000; ++i) {
    Vec3d f1(n(rng), n(rng), n(rng));
    f1.normalize();
    const Vec3d x_t(ux(rng), ux(rng), ux(rng)), x_f(ux(rng), ux(rng), ux(rng));
    const double mag = uf(rng);
    auto r = compute_F2(x_t, x_f, f1);
    if (!r.f2) continue;
    REQUIRE_OK(std::abs(f1.dot(*r.f2)) < 1e-9, "F1.F2 = " + fmt(f1.dot(*r.f2)));
    const double norm = hybrid_force(mag, f1, r.f2, r.theta).norm();
    REQUIRE_OK(std::abs(norm - mag) < 1e-9,
               "|F| deviates by " + fmt(std::abs(norm - mag)) + " N");
  }
  Vec3d f1(0, 0, -1);
  std::optional<Vec3d> f2(Vec3d(1, 0, 0));
  REQUIRE_OK((hybrid_force(7.0, f1, f2, 0.0) - 7.0 * f1).norm() < 1e-9,
             "theta=0 does not reduce to F*F1");
  REQUIRE_OK((hybrid_force(7.0, f1, f2, std::numbers::pi / 2) - 7.0 * *f2).norm() < 1e-9,
             "theta=pi/2 does not reduce to F*F2");
  const double elapsed = seconds_since(t0);
  REQUIRE_OK(elapsed < 1.0, "runtime " + fmt(elapsed) + " s exceeds 1 s");
  return "";
}

// --- criterion 3 ------------------------------------------------------

std::string criterion_torque_law() {
  const Vec3d out = torque_command(Vec3d(2, -3, 5), 4.0);
  REQUIRE_OK(out == Vec3d(-8, 12, 0), "torque_command((2,-3,5), 4) != (-8, 12, 0)");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0), uk(0.0, 10.0);
  for (int i = 0; i < 100000; ++i) {
    const Vec3d tau(u(rng), u(rng), u(rng));
    REQUIRE_OK(torque_command(tau, uk(rng)).z() == 0.0, "z component not identically zero");
  }
  return "";
}

// --- criterion 4 ------------------------------------------------------

std::string criterion_trajectory() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> us(0.001, 800.0), uv(0.5, 120.0), ua(5.0, 800.0);
  for (int i = 0; i < 20000; ++i) {
    const double s = us(rng), v = uv(rng), a = ua(rng);
    const auto p = plan_profile(s, v, a);
    const double at_end = eval_profile(p, p.total_time).first;
    REQUIRE_OK(std::abs(at_end - s) <= 1e-6 * s,
               "displacement misses s by " + fmt(at_end - s) + " mm");
    const bool triangle_expected = v * v / a > s;
    REQUIRE_OK((p.shape == TrapezoidProfile<double>::Shape::triangle) == triangle_expected,
               "branch selection wrong at s=" + fmt(s) + " v=" + fmt(v) + " a=" + fmt(a));
    if (triangle_expected) {
      REQUIRE_OK(std::abs(p.peak_velocity - std::sqrt(s * a)) < 1e-9,
                 "triangle peak != sqrt(s*a)");
    }
  }
  // Branch continuity at s = v^2/a.
  for (int i = 0; i < 200; ++i) {
    const double v = uv(rng), a = ua(rng);
    const double s_star = v * v / a;
    const auto tri = plan_profile(std::nextafter(s_star, 0.0), v, a);
    const auto tra = plan_profile(s_star, v, a);
    REQUIRE_OK(std::abs(tri.total_time - tra.total_time) < 1e-9,
               "t_f discontinuity " + fmt(tri.total_time - tra.total_time) + " s at the branch");
  }
  // Phase-2 arcs: on-sphere and axis-at-center to within 1e-6.
  SphereGuard<double> guard;
  guard.center = {0, 0, 25};
  guard.radius = 120.0;
  ApproachLimits<double> limits;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    Vec3d u0(n(rng), n(rng), n(rng)), u1(n(rng), n(rng), n(rng));
    u0.normalize();
    u1.normalize();
    const double alpha = std::acos(std::clamp(u0.dot(u1), -1.0, 1.0));
    if (alpha < 0.05 || alpha > std::numbers::pi - 0.05) continue;
    const Vec3d x_si = guard.center + guard.radius * u0;
    const Vec3d x_f = guard.center + 70.0 * u1;
    const Mat3d r0 = minimal_rotation<double>(Vec3d::UnitZ(), Vec3d(-u0));
    const auto plan = plan_phase2(r0, x_si, x_f, guard, limits);
    for (const auto& smp : plan.samples) {
      const double off = std::abs((smp.pose.translation - guard.center).norm() - guard.radius);
      REQUIRE_OK(off < 1e-6, "sample leaves the guard sphere by " + fmt(off) + " mm");
      const Vec3d want = (guard.center - smp.pose.translation).normalized();
      const double ang = std::atan2(coil_axis(smp.pose).cross(want).norm(),
                                    coil_axis(smp.pose).dot(want));
      REQUIRE_OK(ang < 1e-6, "coil axis misses the center by " + fmt(ang) + " rad");
    }
  }
  const double elapsed = seconds_since(t0);
  REQUIRE_OK(elapsed < 5.0, "runtime " + fmt(elapsed) + " s exceeds 5 s");
  return "";
}

// --- criterion 5 ------------------------------------------------------

std::string criterion_calibration() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-800.0, 800.0);
  auto random_pose = [&]() {
    Quatd q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return Posed{q.toRotationMatrix(), Vec3d(u(rng), u(rng), u(rng))};
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Posed truth = random_pose();
    std::vector<CalibrationSample<double>> samples;
    for (int k = 0; k < 3; ++k) {
      CalibrationSample<double> s;
      s.base_from_effector = random_pose();
      s.effector_from_tool = random_pose();
      s.camera_from_tool =
          inverse(compose(inverse(compose(s.base_from_effector, s.effector_from_tool)), truth));
      samples.push_back(s);
    }
    const auto result = calibrate_camera_to_base(samples);
    const double rot_err = (result.base_from_camera.rotation - truth.rotation).norm();
    const double tr_err = (result.base_from_camera.translation - truth.translation).norm();
    REQUIRE_OK(rot_err < 1e-9, "rotation Frobenius error " + fmt(rot_err));
    REQUIRE_OK(tr_err < 1e-9, "translation error " + fmt(tr_err) + " mm");
  }
  return "";
}

// --- criterion 6 ------------------------------------------------------

std::string criterion_sensor_zeroing() {
  Posed contact;
  contact.translation = {45, 45, 60};
  contact.rotation =
      minimal_rotation<double>(Vec3d::UnitZ(), Vec3d(-0.6, -0.6, -0.5).normalized());
  auto free_space = [](const Posed&) { return Wrenchd{}; };

  SensorModel<double> quiet;
  quiet.bias.force = {1.0, -2.0, 0.5};
  quiet.bias.torque = {12.0, -7.0, 3.0};
  quiet.sigma_force = 0.0;
  quiet.sigma_torque = 0.0;
  GaussianRng rng0(60);
  phase4_zero_adjust(contact, 5.0, quiet, rng0, free_space);
  const Wrenchd reading = read_wrench(Wrenchd{}, quiet, rng0);
  REQUIRE_OK(reading.force == Vec3d(0, 0, 0) && reading.torque == Vec3d(0, 0, 0),
             "post-zero free-space reading is not exactly zero at sigma=0");

  SensorModel<double> noisy;
  noisy.bias.force = {0.7, -0.3, 1.1};
  noisy.sigma_force = 0.2;
  noisy.zero_offset = noisy.bias;  // perfect zeroing; the noise mean is under test
  GaussianRng rng1(61);
  Vec3d mean = Vec3d::Zero();
  for (int i = 0; i < 10000; ++i) mean += read_wrench(Wrenchd{}, noisy, rng1).force;
  mean /= 10000.0;
  for (int i = 0; i < 3; ++i) {
    REQUIRE_OK(std::abs(mean[i]) < 0.01,
               "noisy mean component " + fmt(mean[i]) + " N exceeds 0.01 N");
  }
  return "";
}

// --- scenario-level helpers -------------------------------------------

Scene bundled_scene() { return load_scene(fs::path(g_configs) / "scene_default.json"); }

Scenario bundled_scenario(const std::string& name) {
  return load_scenario(fs::path(g_configs) / (name + ".json"));
}

// --- criterion 7 ------------------------------------------------------

std::string criterion_convergence() {
  const Scene scene = bundled_scene();
  const Scenario scenario = bundled_scenario("fig14");
  const auto t0 = std::chrono::steady_clock::now();
  const TimeSeriesLog log = run_scenario(scene, scenario);
  const double wall = seconds_since(t0);
  const SummaryMetrics m = summarize(log);
  REQUIRE_OK(m.e_converged.has_value(), "no steady window");
  REQUIRE_OK(*m.e_converged < 3.0, "final-5s mean e = " + fmt(*m.e_converged) + " mm");
  REQUIRE_OK(m.t_above_20N.has_value() && *m.t_above_20N < 10.0,
             "time with F_c > 20 N = " + fmt(m.t_above_20N.value_or(-1)) + " s");
  REQUIRE_OK(wall < 10.0, "60 s simulation took " + fmt(wall) + " s wall-clock");
  return "";
}

// --- criterion 8 ------------------------------------------------------

std::string criterion_force_sweep() {
  const Scene scene = bundled_scene();
  const Scenario base = bundled_scenario("fig12");
  const std::vector<double> forces{5, 10, 20, 30, 40};
  const auto points = run_sweep(scene, base, SweepAxis::force, forces);
  std::string times;
  for (const auto& p : points) {
    REQUIRE_OK(p.metrics.t_below_5mm.has_value(),
               "e never fell below 5 mm at F = " + fmt(p.value) + " N");
    times += fmt(*p.metrics.t_below_5mm) + " ";
  }
  for (size_t i = 1; i < points.size(); ++i) {
    REQUIRE_OK(*points[i].metrics.t_below_5mm <= *points[i - 1].metrics.t_below_5mm + 1e-9,
               "t_below_5mm not non-increasing: " + times);
  }
  REQUIRE_OK(*points.back().metrics.t_below_5mm < *points.front().metrics.t_below_5mm,
             "no strict decrease from 5 N to 40 N: " + times);
  return "";
}

// --- criterion 9 ------------------------------------------------------

std::string criterion_hybrid_vs_pure() {
  const Scene scene = bundled_scene();
  const TimeSeriesLog hybrid = run_scenario(scene, bundled_scenario("fig11_hybrid"));
  const TimeSeriesLog pure = run_scenario(scene, bundled_scenario("fig11_pure"));
  const double eh = summarize(hybrid).e_converged.value_or(1e9);
  const double ep = summarize(pure).e_converged.value_or(0.0);
  REQUIRE_OK(ep > 0.0, "pure-force run produced no steady error");
  REQUIRE_OK(eh < ep, "hybrid " + fmt(eh) + " mm not below pure " + fmt(ep) + " mm");
  REQUIRE_OK((ep - eh) / ep >= 0.2,
             "margin " + fmt(100.0 * (ep - eh) / ep) + "% below 20% (hybrid " + fmt(eh) +
                 ", pure " + fmt(ep) + ")");
  return "";
}

// --- criterion 10 -----------------------------------------------------

std::string criterion_kp_sweep() {
  const Scene scene = bundled_scene();
  const Scenario base = bundled_scenario("fig16");
  const auto points = run_sweep(scene, base, SweepAxis::kp, {0.0, 4.0});
  const auto& r0 = points[0].metrics.steady_ratio;
  const auto& r4 = points[1].metrics.steady_ratio;
  REQUIRE_OK(r0.has_value() && r4.has_value(), "steady ratio undefined");
  REQUIRE_OK(*r4 < *r0,
             "ratio at k_p=4 (" + fmt(*r4) + " mm) not below k_p=0 (" + fmt(*r0) + " mm)");

  // Static torque-centering monotonicity over a 50-point off-axis grid in
  // the light-contact regime. The grid spans the contact envelope: the
  // patch vanishes once the off-axis angle passes the rim aperture plus
  // the submerged-circle half-angle.
  HeadModel<double> head = scene.head;
  head.pose = Posed{};
  const CoilModel<double> coil = scene.coil;
  const double d = coil.floor_radius - head.radius + 0.5;
  const double psi_max = std::acos(
      (d * d + coil.floor_radius * coil.floor_radius - head.radius * head.radius) /
      (2.0 * coil.floor_radius * d));
  const double beta_max = 0.9 * (coil.rim_aperture + psi_max);
  PatchGrid fine{256};
  double prev = -1.0;
  for (int i = 0; i < 50; ++i) {
    const double beta = beta_max * i / 49.0;
    Posed pose;
    pose.rotation = minimal_rotation<double>(Vec3d::UnitZ(), Vec3d(0, 0, -1));
    const Vec3d u(std::sin(beta), 0.0, std::cos(beta));
    pose.translation = head.center() - d * u - coil.floor_radius * pose.rotation.col(2);
    const auto st = contact_wrench(coil, pose, head, {}, {}, fine);
    REQUIRE_OK(st.in_contact, "grid point " + std::to_string(i) + " lost contact");
    const double ratio =
        Eigen::Vector2d(st.tau_tool.x(), st.tau_tool.y()).norm() / st.force_magnitude;
    REQUIRE_OK(ratio > prev, "ratio not increasing at grid point " + std::to_string(i));
    prev = ratio;
  }
  return "";
}

// --- criterion 11 -----------------------------------------------------

std::string criterion_tracking() {
  const Scene scene = bundled_scene();
  const Scenario scenario = bundled_scenario("fig17");
  REQUIRE_OK(scenario.retarget.has_value(), "fig17 scenario lost its retarget event");
  const TimeSeriesLog log = run_scenario(scene, scenario);
  const double t_retarget = scenario.retarget->time;

  bool any_motion = false;
  for (size_t k = 1; k < log.rows.size(); ++k) {
    const auto& row = log.rows[k];
    const double moved =
        (row.head_pose.translation - log.rows[k - 1].head_pose.translation).norm();
    if (moved <= 1e-12) continue;
    any_motion = true;
    REQUIRE_OK(row.in_contact, "contact lost at t = " + fmt(row.t) + " during head motion");
    REQUIRE_OK(row.f_c > 0.0, "F_c = 0 at t = " + fmt(row.t) + " during head motion");
  }
  REQUIRE_OK(any_motion, "the head never moved");

  const LogRow* at = nullptr;
  for (const auto& row : log.rows) {
    if (row.t >= t_retarget) {
      at = &row;
      break;
    }
  }
  REQUIRE_OK(at != nullptr, "log ends before the retarget");
  REQUIRE_OK(at->f_cmd == 40.0, "commanded F at retarget is " + fmt(at->f_cmd) + " N, not 40");

  double reconverged_at = -1.0;
  int run = 0;
  for (const auto& row : log.rows) {
    if (row.t <= t_retarget) continue;
    if (row.e < 3.0) {
      if (++run >= 3) {
        reconverged_at = row.t;
        break;
      }
    } else {
      run = 0;
    }
  }
  REQUIRE_OK(reconverged_at > 0.0, "e never reconverged below 3 mm after the retarget");
  REQUIRE_OK(reconverged_at - t_retarget < 30.0,
             "reconvergence took " + fmt(reconverged_at - t_retarget) + " s");
  return "";
}

// --- criterion 12 -----------------------------------------------------

std::string criterion_determinism() {
  REQUIRE_OK(!g_cli.empty(), "no --cli given");
  const fs::path out1 = fs::path(g_out) / "det1";
  const fs::path out2 = fs::path(g_out) / "det2";
  const std::string scenario = (fs::path(g_configs) / "scheduled.json").string();
  for (const fs::path& out : {out1, out2}) {
    fs::create_directories(out);
    const std::string cmd = g_cli + " run --scenario " + scenario + " --out " + out.string() +
                            " > " + (out / "stdout.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE_OK(rc == 0, "CLI invocation failed with status " + std::to_string(rc));
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(out1 / "scheduled" / "log.csv");
  const std::string b = slurp(out2 / "scheduled" / "log.csv");
  REQUIRE_OK(!a.empty(), "first run produced an empty log");
  REQUIRE_OK(a == b, "log.csv bytes differ between the two process invocations");
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") g_cli = argv[i + 1];
    if (key == "--configs") g_configs = argv[i + 1];
    if (key == "--out") g_out = argv[i + 1];
  }
  if (g_configs.empty()) g_configs = "configs";
  if (g_out.empty()) g_out = "acceptance_out";
  fs::create_directories(g_out);

  struct Criterion {
    int id;
    const char* title;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "force schedule continuity and range", criterion_schedule},
      {2, "hybrid force law norm and orthogonality", criterion_hybrid_force},
      {3, "proportional torque law", criterion_torque_law},
      {4, "trajectory profile and sphere-arc suite", criterion_trajectory},
      {5, "calibration round trip", criterion_calibration},
      {6, "sensor zeroing", criterion_sensor_zeroing},
      {7, "scheduled-force convergence", criterion_convergence},
      {8, "force-sweep trend", criterion_force_sweep},
      {9, "hybrid vs pure force", criterion_hybrid_vs_pure},
      {10, "k_p sweep and torque centering", criterion_kp_sweep},
      {11, "moved-target tracking", criterion_tracking},
      {12, "byte-identical determinism", criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::string detail;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      std::cout << "PASS  criterion " << c.id << ": " << c.title << "\n";
    } else {
      std::cout << "FAIL  criterion " << c.id << ": " << c.title << " -- " << detail << "\n";
      ++failures;
    }
    std::cout.flush();
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
  } else {
    std::cout << "all criteria passed\n";
  }
  return failures;
}
