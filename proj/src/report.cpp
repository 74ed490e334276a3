#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ecodrive/error.hpp"
#include "ecodrive/harness.hpp"

namespace ecodrive {

namespace fs = std::filesystem;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string telemetry_csv(const RaceResult& result) {
  std::string out = "t_s,x1_m,x2_mps,u,N,E_J,Va_mps,Vb_mps,flag\n";
  for (const auto& r : result.telemetry) {
    const auto& s = r.state;
    out += format_number(s.t) + ',' + format_number(s.x1) + ',' + format_number(s.x2) + ',' +
           std::to_string(as_int(s.u)) + ',' + std::to_string(s.switches) + ',' +
           format_number(s.energy) + ',' + format_number(r.va) + ',' + format_number(r.vb) +
           ',' + r.flag + '\n';
  }
  return out;
}

std::string speed_trace_csv(const RaceResult& result) {
  std::string out = "t_s,x2_mps,Va_mps,Vb_mps,u\n";
  for (const auto& r : result.trace)
    out += format_number(r.t) + ',' + format_number(r.x2) + ',' + format_number(r.va) + ',' +
           format_number(r.vb) + ',' + std::to_string(as_int(r.u)) + '\n';
  return out;
}

namespace {

std::string replans_csv(const RaceResult& result) {
  std::string out = "t_s,target_mps,Va_mps,Vb_mps,avg_cost_W,clamped,coast\n";
  for (const auto& r : result.replans)
    out += format_number(r.t) + ',' + format_number(r.target) + ',' +
           format_number(r.band.va) + ',' + format_number(r.band.vb) + ',' +
           format_number(r.band.avg_cost) + ',' + (r.band.clamped ? "1" : "0") + ',' +
           (r.band.coast ? "1" : "0") + '\n';
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string summary_json(const RaceSummary& s) {
  std::string flags = "[";
  for (std::size_t i = 0; i < s.flags.size(); ++i)
    flags += (i ? ", \"" : "\"") + s.flags[i] + "\"";
  flags += "]";
  return "{\n"
         "  \"finish_time_s\": " + format_number(s.finish_time) + ",\n" +
         "  \"total_energy_J\": " + format_number(s.total_energy) + ",\n" +
         "  \"switches\": " + std::to_string(s.switches) + ",\n" +
         "  \"min_switch_gap_s\": " +
         (s.min_switch_gap ? format_number(*s.min_switch_gap) : std::string("null")) + ",\n" +
         "  \"avg_speed_mps\": " + format_number(s.avg_speed) + ",\n" +
         "  \"flags\": " + flags + "\n}\n";
}

void emit_report(const RaceResult& result, const Scenario& /*scenario*/,
                 const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "telemetry.csv", telemetry_csv(result));
  write_file(out_dir / "summary.json", summary_json(result.summary));
  write_file(out_dir / "speed_trace.csv", speed_trace_csv(result));
  write_file(out_dir / "replans.csv", replans_csv(result));
}

fs::path resolve_output_dir(const fs::path& fallback) {
  if (const char* env = std::getenv("ECODRIVE_OUT"); env && *env) return fs::path(env);
  return fallback;
}

std::vector<TelemetryRow> parse_telemetry_csv(std::string_view text) {
  std::vector<TelemetryRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "t_s,x1_m,x2_mps,u,N,E_J,Va_mps,Vb_mps,flag")
        throw Error(ErrorKind::Parse, "line 1: unexpected telemetry header");
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 9)
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 9 fields");
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      TelemetryRow r;
      r.state.t = num(f[0]);
      r.state.x1 = num(f[1]);
      r.state.x2 = num(f[2]);
      r.state.u = engine_from_int(static_cast<int>(num(f[3])));
      r.state.switches = static_cast<long>(num(f[4]));
      r.state.energy = num(f[5]);
      r.va = num(f[6]);
      r.vb = num(f[7]);
      r.flag = f[8];
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

}  // namespace ecodrive
