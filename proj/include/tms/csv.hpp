#pragma once

#include <filesystem>
#include <string>

#include "tms/world.hpp"

namespace tms {

/// Fixed-schema CSV of a run log. Floats are shortest round-trip
/// decimals; the ratio column is empty when F_c is below the 0.5 N
/// guard. Identical (config, seed) runs serialize to identical bytes.
std::string log_to_csv(const TimeSeriesLog& log);
void write_log_csv(const std::filesystem::path& file, const TimeSeriesLog& log);
TimeSeriesLog read_log_csv(const std::filesystem::path& file);

/// Planned phases 1-3 as t, x, y, z, qw, qx, qy, qz, phase with one
/// global clock.
std::string plans_to_csv(const ApproachPlans& plans);
void write_plan_csv(const std::filesystem::path& file, const ApproachPlans& plans);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace tms
