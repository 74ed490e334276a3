#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ecodrive/error.hpp"
#include "ecodrive/harness.hpp"

namespace ecodrive {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line, std::string_view column) {
  field = trim(field);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": column " +
                                      std::string(column) + ": not a number: '" +
                                      std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Rows of a numeric CSV with a fixed header. Blank lines are skipped; an
// empty input yields no rows.
std::vector<std::vector<double>> numeric_csv(std::string_view text,
                                             const std::vector<std::string>& header) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split(body, ',');
    if (!seen_header) {
      bool ok = fields.size() == header.size();
      for (std::size_t i = 0; ok && i < header.size(); ++i) ok = trim(fields[i]) == header[i];
      if (!ok) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                          ": expected header '" + expected + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
    std::vector<double> row;
    for (std::size_t i = 0; i < fields.size(); ++i)
      row.push_back(parse_double(fields[i], line_no, header[i]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

template <class Fn>
auto with_path(const fs::path& path, Fn&& fn) {
  try {
    return fn(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.filename().string() + ": " + e.what());
  }
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* power_name(PowerModel::Kind k) {
  switch (k) {
    case PowerModel::Kind::WheelPower: return "wheel_power";
    case PowerModel::Kind::ConstantElectrical: return "constant_electrical";
    case PowerModel::Kind::Custom: return "custom";
  }
  return "?";
}

PowerModel power_from_name(const std::string& name, double watts) {
  if (name == "constant_electrical") return PowerModel::constant_electrical(watts);
  if (name == "wheel_power") return PowerModel::wheel_power();
  throw Error(ErrorKind::Validation,
              "power_model must be 'constant_electrical' or 'wheel_power', got '" + name + "'");
}

double number_value(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end)
    throw Error(ErrorKind::Parse, "override " + key + ": not a number: '" + value + "'");
  return v;
}

bool bool_value(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorKind::Parse, "override " + key + ": not a boolean: '" + value + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

TrackProfile parse_track_csv(std::string_view text) {
  std::vector<TrackPoint> pts;
  for (const auto& r : numeric_csv(text, {"s_m", "slope_rad", "vsafe_mps"}))
    pts.push_back({r[0], r[1], r[2]});
  return TrackProfile(std::move(pts));
}

TrackProfile read_track_csv(const fs::path& path) {
  return with_path(path, [](const std::string& t) { return parse_track_csv(t); });
}

WindField parse_wind_csv(std::string_view text) {
  const auto rows = numeric_csv(text, {"s_m", "t_s", "v_mps"});
  if (rows.empty()) return WindField::calm();
  std::vector<double> positions, times, values;
  for (const auto& r : rows) {
    if (positions.empty() || r[0] != positions.back()) positions.push_back(r[0]);
    if (positions.size() == 1) times.push_back(r[1]);
    values.push_back(r[2]);
  }
  if (values.size() != positions.size() * times.size())
    throw Error(ErrorKind::Validation, "wind: grid is not rectangular");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = k / times.size(), j = k % times.size();
    if (rows[k][0] != positions[i] || rows[k][1] != times[j])
      throw Error(ErrorKind::Validation,
                  "wind: data row " + std::to_string(k + 1) +
                      " breaks the row-major (s_m, t_s) grid order");
  }
  return WindField(std::move(positions), std::move(times), std::move(values));
}

WindField read_wind_csv(const fs::path& path) {
  return with_path(path, [](const std::string& t) { return parse_wind_csv(t); });
}

ParamsFile parse_params_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("params: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Parse, "params: expected a JSON object");
  ParamsFile out;
  auto& p = out.params;
  std::string model = "constant_electrical";
  double watts = 161.0;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "a") p.drag = value.get<double>();
      else if (key == "c") p.friction = value.get<double>();
      else if (key == "g") p.gravity = value.get<double>();
      else if (key == "f1") p.traction = value.get<double>();
      else if (key == "m") p.mass = value.get<double>();
      else if (key == "alpha") p.switch_cost = value.get<double>();
      else if (key == "power_model") model = value.get<std::string>();
      else if (key == "constant_watts") watts = value.get<double>();
      else if (key == "signed_drag") p.signed_drag = value.get<bool>();
      else throw Error(ErrorKind::Parse, "params: unknown key '" + key + "'");
    }
  } catch (const json::type_error& e) {
    throw Error(ErrorKind::Parse, std::string("params: ") + e.what());
  }
  p.validate();
  out.power = power_from_name(model, watts);
  return out;
}

ParamsFile read_params_json(const fs::path& path) {
  return with_path(path, [](const std::string& t) { return parse_params_json(t); });
}

std::string track_to_csv(const TrackProfile& track) {
  std::string out = "s_m,slope_rad,vsafe_mps\n";
  for (const auto& p : track.points())
    out += exact(p.s) + "," + exact(p.slope) + "," + exact(p.safety_speed) + "\n";
  return out;
}

std::string wind_to_csv(const WindField& wind) {
  std::string out = "s_m,t_s,v_mps\n";
  const auto s = wind.positions();
  const auto t = wind.times();
  const auto v = wind.values();
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      out += exact(s[i]) + "," + exact(t[j]) + "," + exact(v[i * t.size() + j]) + "\n";
  return out;
}

std::string params_to_json(const VehicleParams& p, const PowerModel& power) {
  if (power.kind() == PowerModel::Kind::Custom)
    throw Error(ErrorKind::Validation, "params: a custom power model cannot be serialized");
  json j = json::object();
  j["a"] = p.drag;
  j["c"] = p.friction;
  j["g"] = p.gravity;
  j["f1"] = p.traction;
  j["m"] = p.mass;
  j["alpha"] = p.switch_cost;
  j["power_model"] = power_name(power.kind());
  j["constant_watts"] = power.constant_watts();
  j["signed_drag"] = p.signed_drag;
  return j.dump(2) + "\n";
}

std::string controller_to_json(const ControllerConfig& cfg) {
  json j = json::object();
  j["replan_interval_s"] = cfg.replan_interval;
  j["delta_mps"] = cfg.delta;
  j["duration_s"] = cfg.duration;
  j["dt_s"] = cfg.dt;
  j["overshoot_slack_mps"] = cfg.overshoot_slack;
  j["hard_cap_factor"] = cfg.hard_cap_factor;
  j["trace_interval_s"] = cfg.trace_interval;
  j["grid_offsets_mps"] = cfg.grid.offsets;
  j["dichotomy_tol_mps"] = cfg.grid.dichotomy_tol;
  j["refine_step_mps"] = cfg.grid.refine_step ? json(*cfg.grid.refine_step) : json(nullptr);
  j["refine_halfwidth_mps"] = cfg.grid.refine_halfwidth;
  return j.dump(2) + "\n";
}

ControllerConfig parse_controller_json(std::string_view text, const TrackProfile& track) {
  ControllerConfig cfg;
  cfg.length = track.length();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("controller: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Parse, "controller: expected a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "replan_interval_s") cfg.replan_interval = v.get<double>();
      else if (key == "delta_mps") cfg.delta = v.get<double>();
      else if (key == "duration_s") cfg.duration = v.get<double>();
      else if (key == "dt_s") cfg.dt = v.get<double>();
      else if (key == "overshoot_slack_mps") cfg.overshoot_slack = v.get<double>();
      else if (key == "hard_cap_factor") cfg.hard_cap_factor = v.get<double>();
      else if (key == "trace_interval_s") cfg.trace_interval = v.get<double>();
      else if (key == "grid_offsets_mps") cfg.grid.offsets = v.get<std::vector<double>>();
      else if (key == "dichotomy_tol_mps") cfg.grid.dichotomy_tol = v.get<double>();
      else if (key == "refine_step_mps") {
        if (v.is_null()) cfg.grid.refine_step.reset();
        else cfg.grid.refine_step = v.get<double>();
      } else if (key == "refine_halfwidth_mps") cfg.grid.refine_halfwidth = v.get<double>();
      else throw Error(ErrorKind::Parse, "controller: unknown key '" + key + "'");
    }
  } catch (const json::type_error& e) {
    throw Error(ErrorKind::Parse, std::string("controller: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

void Scenario::validate() const {
  params.validate();
  controller.validate();
  if (controller.length != track.length())
    throw Error(ErrorKind::Validation, "scenario: controller length differs from track length");
  if (power.kind() == PowerModel::Kind::ConstantElectrical && !(power.constant_watts() > 0.0))
    throw Error(ErrorKind::Validation, "scenario: constant_watts must be > 0");
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorKind::Parse, "override must look like key=value, got '" +
                                      std::string(text) + "'");
  return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

void apply_overrides(Scenario& sc, const Overrides& overrides) {
  auto& p = sc.params;
  auto& c = sc.controller;
  for (const auto& [key, value] : overrides) {
    if (key == "a") p.drag = number_value(key, value);
    else if (key == "c") p.friction = number_value(key, value);
    else if (key == "g") p.gravity = number_value(key, value);
    else if (key == "f1") p.traction = number_value(key, value);
    else if (key == "m") p.mass = number_value(key, value);
    else if (key == "alpha") p.switch_cost = number_value(key, value);
    else if (key == "signed_drag") p.signed_drag = bool_value(key, value);
    else if (key == "power_model") sc.power = power_from_name(value, sc.power.constant_watts());
    else if (key == "constant_watts") sc.power = PowerModel::constant_electrical(number_value(key, value));
    else if (key == "replan_interval") c.replan_interval = number_value(key, value);
    else if (key == "delta") c.delta = number_value(key, value);
    else if (key == "duration") c.duration = number_value(key, value);
    else if (key == "target_speed") {
      const double v = number_value(key, value);
      if (!(v > 0.0)) throw Error(ErrorKind::Validation, "override target_speed must be > 0");
      c.duration = c.length / v;
    } else if (key == "dt") c.dt = number_value(key, value);
    else if (key == "overshoot_slack") c.overshoot_slack = number_value(key, value);
    else if (key == "hard_cap_factor") c.hard_cap_factor = number_value(key, value);
    else if (key == "trace_interval") c.trace_interval = number_value(key, value);
    else if (key == "dichotomy_tol") c.grid.dichotomy_tol = number_value(key, value);
    else if (key == "refine_step") c.grid.refine_step = number_value(key, value);
    else throw Error(ErrorKind::Parse, "unknown override key '" + key + "'");
  }
  sc.validate();
}

Scenario load_scenario(const std::string& source, const Overrides& overrides) {
  const fs::path dir(source);
  Scenario sc;
  if (!fs::is_directory(dir)) {
    const auto names = fixture_names();
    if (std::find(names.begin(), names.end(), source) == names.end())
      throw Error(ErrorKind::Io, "scenario " + source + " is neither a directory nor a fixture");
    sc = make_fixture(source);
  } else {
    sc.name = dir.filename().empty() ? dir.parent_path().filename().string()
                                     : dir.filename().string();
    auto pf = read_params_json(dir / "params.json");
    sc.params = pf.params;
    sc.power = pf.power;
    sc.track = read_track_csv(dir / "track.csv");
    sc.wind = fs::exists(dir / "wind.csv") ? read_wind_csv(dir / "wind.csv") : WindField::calm();
    if (fs::exists(dir / "controller.json")) {
      sc.controller = with_path(dir / "controller.json", [&](const std::string& t) {
        return parse_controller_json(t, sc.track);
      });
    } else {
      sc.controller.length = sc.track.length();
    }
  }
  sc.output_dir = fs::path("out") / sc.name;
  apply_overrides(sc, overrides);
  return sc;
}

void dump_scenario(const Scenario& sc, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "params.json", params_to_json(sc.params, sc.power));
  write_file(dir / "track.csv", track_to_csv(sc.track));
  if (!sc.wind.empty()) write_file(dir / "wind.csv", wind_to_csv(sc.wind));
  write_file(dir / "controller.json", controller_to_json(sc.controller));
}

// ---------------------------------------------------------------------------

std::vector<std::string> fixture_names() { return {"flat16500", "hill", "gust"}; }

Scenario make_fixture(const std::string& name) {
  constexpr double kLength = 16500.0;
  Scenario sc;
  sc.name = name;
  sc.power = PowerModel::constant_electrical(161.0);
  sc.controller.length = kLength;
  sc.controller.duration = kLength / 7.0;

  if (name == "flat16500") {
    sc.track = TrackProfile::flat(kLength, 12.0);
  } else if (name == "gust") {
    sc.track = TrackProfile::flat(kLength, 12.0);
    // 3 m/s headwind for 120 s centred on mid-race.
    const double mid = 0.5 * sc.controller.duration;
    sc.wind = WindField({0.0}, {0.0, mid - 60.0, mid + 60.0}, {0.0, -3.0, 0.0});
  } else if (name == "hill") {
    // Elevation A cos(2 pi s / lambda) with a 2% peak grade, sampled as a
    // piecewise-constant slope at the middle of each 50 m piece. The start
    // is on a crest: the steepest climbs cannot be taken from rest.
    constexpr double kWavelength = 1100.0;
    constexpr double kPeakGrade = 0.02;
    constexpr double kPiece = 50.0;
    constexpr double kSafety = 13.0;
    std::vector<TrackPoint> pts;
    const int n = static_cast<int>(kLength / kPiece);
    for (int i = 0; i <= n; ++i) {
      const double s = i * kPiece;
      const double mid = std::min(s + 0.5 * kPiece, kLength);
      const double grade = -kPeakGrade * std::sin(2.0 * std::numbers::pi * mid / kWavelength);
      pts.push_back({s, i == n ? pts.back().slope : std::atan(grade), kSafety});
    }
    sc.track = TrackProfile(std::move(pts));
  } else {
    throw Error(ErrorKind::Validation, "unknown fixture '" + name + "'");
  }
  sc.output_dir = fs::path("out") / name;
  sc.validate();
  return sc;
}

}  // namespace ecodrive
