// Command-line driver: calibration utility, scenario runs, parameter
// sweeps and log re-summarizing. Exit codes: 0 success, 2 configuration
// error, 3 planning abort, 4 I/O failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "tms/csv.hpp"
#include "tms/errors.hpp"
#include "tms/scene.hpp"
#include "tms/svg.hpp"
#include "tms/world.hpp"

namespace fs = std::filesystem;
using namespace tms;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPlanning = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string scene_file;
  std::string scenario_file;
  std::string out_root;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool plots = false;
  std::string f2_sign;
};

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

std::pair<Scene, Scenario> load_configs(const CommonOpts& opts) {
  if (opts.scenario_file.empty()) throw ConfigError("--scenario is required");
  Scenario scenario = load_scenario(opts.scenario_file);
  fs::path scene_path;
  if (!opts.scene_file.empty()) {
    scene_path = opts.scene_file;
  } else if (!scenario.scene_path.empty()) {
    scene_path = fs::path(opts.scenario_file).parent_path() / scenario.scene_path;
  } else {
    throw ConfigError("no scene given: pass --scene or set \"scene\" in the scenario");
  }
  Scene scene = load_scene(scene_path);
  if (opts.seed_set) scene.seed = opts.seed;
  if (!opts.f2_sign.empty()) {
    scenario.controller.f2_sign = opts.f2_sign == "paper" ? F2Sign::paper : F2Sign::error;
  }
  return {scene, scenario};
}

fs::path prepare_out_dir(const CommonOpts& opts, const std::string& name) {
  fs::path root = opts.out_root.empty() ? fs::path("out") : fs::path(opts.out_root);
  fs::path dir = root / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void emit_run_artifacts(const fs::path& dir, const Scene& scene, const Scenario& scenario,
                        const TimeSeriesLog& log, bool plots) {
  write_log_csv(dir / "log.csv", log);
  const SummaryMetrics metrics = summarize(log);
  write_text(dir / "summary.json", summary_to_json(metrics, log.scenario, log.seed));
  ApproachPlans plans =
      plan_approach(scene, scenario.target.value_or(scene.target));
  write_plan_csv(dir / "plan.csv", plans);
  if (plots) write_run_plots(dir, log);
}

int cmd_calibrate(const std::string& samples_file, const std::string& out_file) {
  auto samples = load_calibration_samples(samples_file);
  auto result = calibrate_camera_to_base(samples);

  Quatd q = canonical_quaternion(result.base_from_camera.rotation);
  std::cout << "base_from_camera q(w,x,y,z): " << format_double(q.w()) << " "
            << format_double(q.x()) << " " << format_double(q.y()) << " " << format_double(q.z())
            << "\n";
  std::cout << "base_from_camera t(x,y,z) mm: "
            << format_double(result.base_from_camera.translation.x()) << " "
            << format_double(result.base_from_camera.translation.y()) << " "
            << format_double(result.base_from_camera.translation.z()) << "\n";
  for (size_t i = 0; i < result.rotation_residual_rad.size(); ++i) {
    std::cout << "sample " << i
              << ": rotation residual " << format_double(result.rotation_residual_rad[i])
              << " rad, translation residual "
              << format_double(result.translation_residual_mm[i]) << " mm\n";
  }
  if (!result.consistent) {
    std::cerr << "warning: samples disagree by "
              << format_double(result.max_pairwise_rotation_rad * 180.0 / std::numbers::pi)
              << " deg (> 5 deg); the mean is still reported\n";
  }
  if (!out_file.empty()) write_text(out_file, calibration_result_to_json(result));
  return kExitOk;
}

int cmd_run(const CommonOpts& opts) {
  auto [scene, scenario] = load_configs(opts);
  const fs::path dir = prepare_out_dir(opts, scenario.name);
  TimeSeriesLog log = run_scenario(scene, scenario);
  emit_run_artifacts(dir, scene, scenario, log, opts.plots);
  const SummaryMetrics m = summarize(log);
  std::cout << scenario.name << ": " << log.rows.size() << " rows -> " << dir.string() << "\n";
  if (m.e_converged) std::cout << "  e_converged  " << format_double(*m.e_converged) << " mm\n";
  if (m.t_below_5mm) std::cout << "  t_below_5mm  " << format_double(*m.t_below_5mm) << " s\n";
  if (m.t_above_20N) std::cout << "  t_above_20N  " << format_double(*m.t_above_20N) << " s\n";
  if (m.steady_ratio) std::cout << "  steady_ratio " << format_double(*m.steady_ratio) << " mm\n";
  return kExitOk;
}

std::string metrics_csv_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

int cmd_sweep(const CommonOpts& opts, const std::string& axis_name,
              const std::string& values_text) {
  SweepAxis axis;
  if (axis_name == "force") {
    axis = SweepAxis::force;
  } else if (axis_name == "kp") {
    axis = SweepAxis::kp;
  } else {
    throw ConfigError("--axis must be force or kp");
  }
  std::vector<double> values;
  size_t start = 0;
  while (start <= values_text.size()) {
    size_t comma = values_text.find(',', start);
    std::string tok = values_text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      try {
        values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("bad sweep value '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw ConfigError("--values holds no numbers");

  auto [scene, scenario] = load_configs(opts);
  auto points = run_sweep(scene, scenario, axis, values);

  std::string table =
      "value,e_converged_mm,t_below_5mm_s,t_above_20N_s,steady_ratio_mm,min_fc_during_motion_N\n";
  for (const auto& p : points) {
    const fs::path dir = prepare_out_dir(opts, p.name);
    emit_run_artifacts(dir, scene, scenario, p.log, opts.plots);
    table += format_double(p.value) + "," + metrics_csv_cell(p.metrics.e_converged) + "," +
             metrics_csv_cell(p.metrics.t_below_5mm) + "," +
             metrics_csv_cell(p.metrics.t_above_20N) + "," +
             metrics_csv_cell(p.metrics.steady_ratio) + "," +
             metrics_csv_cell(p.metrics.min_fc_during_motion) + "\n";
  }
  const fs::path base_dir = prepare_out_dir(opts, scenario.name);
  write_text(base_dir / ("sweep_" + axis_name + ".csv"), table);
  std::cout << table;
  return kExitOk;
}

int cmd_report(const std::string& log_file, const std::string& out_file) {
  TimeSeriesLog log = read_log_csv(log_file);
  const std::string text = summary_to_json(summarize(log), log.scenario, log.seed);
  if (out_file.empty()) {
    std::cout << text;
  } else {
    write_text(out_file, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robotized TMS coil force/torque control simulator"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* cal = app.add_subcommand("calibrate", "Average camera-to-base calibration samples");
  std::string cal_file, cal_out;
  cal->add_option("samples", cal_file, "JSON file of (bTe, eTt, cTt) samples")->required();
  cal->add_option("--out", cal_out, "Write the result as JSON");

  auto* run = app.add_subcommand("run", "Run one scenario and write log.csv/summary.json");
  auto* sweep = app.add_subcommand("sweep", "Run a scenario across force or k_p values");
  for (CLI::App* c : {run, sweep}) {
    c->add_option("--scene", opts.scene_file, "Scene JSON file");
    c->add_option("--scenario", opts.scenario_file, "Scenario JSON file")->required();
    c->add_option("--out", opts.out_root, "Output root directory (default: ./out)")
        ->envname("TMS_SIM_OUT");
    c->add_option("--seed", opts.seed, "Override the scene RNG seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    c->add_flag("--plots", opts.plots, "Also write SVG charts");
    c->add_option("--f2-sign", opts.f2_sign, "Override the F2 sign variant")
        ->check(CLI::IsMember({"error", "paper"}));
  }
  std::string axis, values;
  sweep->add_option("--axis", axis, "Sweep axis: force or kp")->required();
  sweep->add_option("--values", values, "Comma-separated sweep values")->required();

  auto* report = app.add_subcommand("report", "Re-summarize an existing log.csv");
  std::string report_log, report_out;
  report->add_option("log", report_log, "log.csv produced by run/sweep")->required();
  report->add_option("--out", report_out, "Write summary JSON here instead of stdout");

  try {
    app.parse(argc, argv);
    if (cal->parsed()) return cmd_calibrate(cal_file, cal_out);
    if (run->parsed()) return cmd_run(opts);
    if (sweep->parsed()) return cmd_sweep(opts, axis, values);
    if (report->parsed()) return cmd_report(report_log, report_out);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PlanningError& e) {
    std::cerr << "planning abort: " << e.what() << "\n";
    return kExitPlanning;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
