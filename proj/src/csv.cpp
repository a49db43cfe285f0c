#include "tms/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "tms/errors.hpp"

namespace tms {
namespace {

constexpr const char* kLogHeader =
    "t,phase,e,e_n,e_p,abs_e_n,abs_e_p,theta,F,F_c,tau_cx,tau_cy,tau_cz,ratio,in_contact,"
    "coil_x,coil_y,coil_z,coil_qw,coil_qx,coil_qy,coil_qz,"
    "head_x,head_y,head_z,head_qw,head_qx,head_qy,head_qz";
constexpr int kLogColumns = 29;

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append_pose(std::string& out, const Posed& p) {
  Quatd q = canonical_quaternion(p.rotation);
  for (int i = 0; i < 3; ++i) {
    out.push_back(',');
    append_double(out, p.translation[i]);
  }
  out.push_back(',');
  append_double(out, q.w());
  out.push_back(',');
  append_double(out, q.x());
  out.push_back(',');
  append_double(out, q.y());
  out.push_back(',');
  append_double(out, q.z());
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(std::string("bad numeric field in CSV (") + what + "): '" +
                      std::string(s) + "'");
  }
  return v;
}

Posed pose_from_fields(const std::vector<std::string_view>& f, size_t at) {
  Posed p;
  p.translation = {parse_double(f[at], "pose"), parse_double(f[at + 1], "pose"),
                   parse_double(f[at + 2], "pose")};
  Quatd q(parse_double(f[at + 3], "pose"), parse_double(f[at + 4], "pose"),
          parse_double(f[at + 5], "pose"), parse_double(f[at + 6], "pose"));
  q.normalize();
  p.rotation = q.toRotationMatrix();
  return p;
}

}  // namespace

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

std::string log_to_csv(const TimeSeriesLog& log) {
  std::string out;
  out.reserve(log.rows.size() * 220 + 256);
  out += kLogHeader;
  out.push_back('\n');
  for (const auto& r : log.rows) {
    append_double(out, r.t);
    out.push_back(',');
    out += std::to_string(r.phase);
    out.push_back(',');
    append_double(out, r.e);
    out.push_back(',');
    append_double(out, r.e_n);
    out.push_back(',');
    append_double(out, r.e_p);
    out.push_back(',');
    append_double(out, std::abs(r.e_n));
    out.push_back(',');
    append_double(out, std::abs(r.e_p));
    out.push_back(',');
    append_double(out, r.theta);
    out.push_back(',');
    append_double(out, r.f_cmd);
    out.push_back(',');
    append_double(out, r.f_c);
    for (int i = 0; i < 3; ++i) {
      out.push_back(',');
      append_double(out, r.tau_c[i]);
    }
    out.push_back(',');
    if (r.ratio) append_double(out, *r.ratio);
    out.push_back(',');
    out.push_back(r.in_contact ? '1' : '0');
    append_pose(out, r.coil_pose);
    append_pose(out, r.head_pose);
    out.push_back('\n');
  }
  return out;
}

void write_log_csv(const std::filesystem::path& file, const TimeSeriesLog& log) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  const std::string text = log_to_csv(log);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

TimeSeriesLog read_log_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(file.string() + " is empty");
  if (line != kLogHeader) throw ConfigError(file.string() + " has an unexpected header");

  TimeSeriesLog log;
  log.scenario = file.stem().string();
  std::vector<std::string_view> fields;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fields.clear();
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.emplace_back(line.data() + start, line.size() - start);
        break;
      }
      fields.emplace_back(line.data() + start, comma - start);
      start = comma + 1;
    }
    if (static_cast<int>(fields.size()) != kLogColumns) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(kLogColumns) + " columns");
    }
    LogRow r;
    r.t = parse_double(fields[0], "t");
    r.phase = static_cast<int>(parse_double(fields[1], "phase"));
    r.e = parse_double(fields[2], "e");
    r.e_n = parse_double(fields[3], "e_n");
    r.e_p = parse_double(fields[4], "e_p");
    r.theta = parse_double(fields[7], "theta");
    r.f_cmd = parse_double(fields[8], "F");
    r.f_c = parse_double(fields[9], "F_c");
    r.tau_c = {parse_double(fields[10], "tau_cx"), parse_double(fields[11], "tau_cy"),
               parse_double(fields[12], "tau_cz")};
    if (!fields[13].empty()) r.ratio = parse_double(fields[13], "ratio");
    r.in_contact = fields[14] == "1";
    r.coil_pose = pose_from_fields(fields, 15);
    r.head_pose = pose_from_fields(fields, 22);
    log.rows.push_back(r);
  }
  if (log.rows.size() >= 2) log.dt = log.rows[1].t - log.rows[0].t;
  return log;
}

std::string plans_to_csv(const ApproachPlans& plans) {
  std::string out = "t,x,y,z,qw,qx,qy,qz,phase\n";
  double offset = 0.0;
  double last = -1.0;
  for (const PhasePlan<double>* plan : {&plans.phase1, &plans.phase2, &plans.phase3}) {
    for (const auto& s : plan->samples) {
      const double t = offset + s.t;
      if (t <= last) continue;  // phase boundaries share a sample
      last = t;
      append_double(out, t);
      Quatd q = canonical_quaternion(s.pose.rotation);
      for (int i = 0; i < 3; ++i) {
        out.push_back(',');
        append_double(out, s.pose.translation[i]);
      }
      out.push_back(',');
      append_double(out, q.w());
      out.push_back(',');
      append_double(out, q.x());
      out.push_back(',');
      append_double(out, q.y());
      out.push_back(',');
      append_double(out, q.z());
      out.push_back(',');
      out += std::to_string(plan->phase);
      out.push_back('\n');
    }
    offset += plan->total_time;
  }
  return out;
}

void write_plan_csv(const std::filesystem::path& file, const ApproachPlans& plans) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  const std::string text = plans_to_csv(plans);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

}  // namespace tms
