#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecodrive/error.hpp"
#include "ecodrive/harness.hpp"

using namespace ecodrive;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecodrive_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Kind and message of the error thrown by fn, or an empty message.
std::pair<ErrorKind, std::string> caught(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return {e.kind(), e.what()};
  }
  return {ErrorKind::NotApplicable, ""};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

Scenario short_flat() {
  auto sc = make_fixture("flat16500");
  sc.track = TrackProfile::flat(1500.0, 12.0);
  sc.controller.length = 1500.0;
  sc.controller.duration = 1500.0 / 7.0;
  return sc;
}

}  // namespace

TEST_CASE("fixtures") {
  CHECK(fixture_names() == std::vector<std::string>{"flat16500", "hill", "gust"});
  const auto flat = make_fixture("flat16500");
  CHECK(flat.track.length() == 16500.0);
  for (double x : {0.0, 1234.5, 16500.0}) {
    CHECK(flat.track.slope_at(x) == 0.0);
    CHECK(flat.track.safety_speed_at(x) == 12.0);
  }
  CHECK(flat.wind.empty());
  CHECK(flat.power.kind() == PowerModel::Kind::ConstantElectrical);
  CHECK(flat.params.switch_cost == 10.0);
  CHECK(flat.controller.duration == doctest::Approx(16500.0 / 7.0));
  CHECK_NOTHROW(flat.validate());

  const auto hill = make_fixture("hill");
  CHECK(hill.track.length() == 16500.0);
  double steepest = 0.0;
  for (const auto& p : hill.track.points()) steepest = std::max(steepest, std::abs(std::tan(p.slope)));
  CHECK(steepest <= 0.02 + 1e-12);
  CHECK(steepest > 0.019);

  const auto gust = make_fixture("gust");
  const double mid = 0.5 * gust.controller.duration;
  CHECK(gust.wind.at(100.0, mid) == -3.0);
  CHECK(gust.wind.at(100.0, mid - 61.0) == 0.0);
  CHECK(gust.wind.at(100.0, mid + 61.0) == 0.0);

  CHECK(caught([] { make_fixture("nope"); }).first == ErrorKind::Validation);
}

TEST_CASE("track and wind parsing") {
  const auto track = parse_track_csv("s_m,slope_rad,vsafe_mps\n0,0,12\n\n100,0.01,10\n200,0,10\n");
  CHECK(track.length() == 200.0);
  CHECK(track.slope_at(150.0) == 0.01);

  auto [kind, msg] = caught([] { parse_track_csv("s_m,slope_rad,vsafe_mps\n0,0,12\n100,abc,12\n"); });
  CHECK(kind == ErrorKind::Parse);
  CHECK(contains(msg, "line 3"));
  std::tie(kind, msg) = caught([] { parse_track_csv("s_m,slope_rad,vsafe_mps\n0,0,12\n100,0\n"); });
  CHECK(kind == ErrorKind::Parse);
  CHECK(contains(msg, "line 3"));
  std::tie(kind, msg) = caught([] { parse_track_csv("s,slope,v\n0,0,12\n"); });
  CHECK(kind == ErrorKind::Parse);
  CHECK(contains(msg, "line 1"));

  std::tie(kind, msg) = caught([] { parse_track_csv(""); });
  CHECK(kind == ErrorKind::Validation);
  CHECK(contains(msg, "no breakpoints"));
  std::tie(kind, msg) = caught([] { parse_track_csv("s_m,slope_rad,vsafe_mps\n"); });
  CHECK(contains(msg, "no breakpoints"));
  std::tie(kind, msg) = caught([] { parse_track_csv("s_m,slope_rad,vsafe_mps\n0,0,12\n100,0,12\n50,0,12\n"); });
  CHECK(kind == ErrorKind::Validation);

  const auto wind = parse_wind_csv("s_m,t_s,v_mps\n0,0,0\n0,10,-2\n500,0,1\n500,10,-1\n");
  CHECK(wind.at(100.0, 5.0) == 0.0);
  CHECK(wind.at(100.0, 15.0) == -2.0);
  CHECK(wind.at(600.0, 15.0) == -1.0);
  CHECK(caught([] { parse_wind_csv("s_m,t_s,v_mps\n0,0,0\n0,10,-2\n500,0,1\n"); }).first ==
        ErrorKind::Validation);
}

TEST_CASE("params and controller files") {
  const auto pf = parse_params_json(R"({"a": 7e-4, "alpha": 20, "power_model": "wheel_power"})");
  CHECK(pf.params.drag == 7e-4);
  CHECK(pf.params.switch_cost == 20.0);
  CHECK(pf.params.friction == 0.03);
  CHECK(pf.power.kind() == PowerModel::Kind::WheelPower);
  CHECK(caught([] { parse_params_json(R"({"beta": 1})"); }).first == ErrorKind::Parse);
  CHECK(caught([] { parse_params_json("{"); }).first == ErrorKind::Parse);
  CHECK(caught([] { parse_params_json(R"({"power_model": "diesel"})"); }).first == ErrorKind::Validation);
  CHECK(caught([] { parse_params_json(R"({"m": -1})"); }).first == ErrorKind::Validation);

  const auto track = TrackProfile::flat(1000.0, 10.0);
  const auto cfg = parse_controller_json(R"({"replan_interval_s": 2, "refine_step_mps": 0.01})", track);
  CHECK(cfg.replan_interval == 2.0);
  CHECK(cfg.grid.refine_step.value() == 0.01);
  CHECK(cfg.length == 1000.0);
  CHECK(caught([&] { parse_controller_json(R"({"dt_s": 5})", track); }).first == ErrorKind::Validation);
}

TEST_CASE("overrides") {
  CHECK(parse_override("alpha=20") == std::pair<std::string, std::string>{"alpha", "20"});
  CHECK(caught([] { parse_override("alpha"); }).first == ErrorKind::Parse);
  CHECK(caught([] { parse_override("=3"); }).first == ErrorKind::Parse);

  const auto sc = load_scenario("flat16500", {{"alpha", "20"}});
  CHECK(sc.params.switch_cost == 20.0);
  CHECK(sc.output_dir == fs::path("out") / "flat16500");

  auto s2 = make_fixture("flat16500");
  apply_overrides(s2, {{"delta", "0.3"}, {"power_model", "wheel_power"}, {"signed_drag", "true"}});
  CHECK(s2.controller.delta == 0.3);
  CHECK(s2.power.kind() == PowerModel::Kind::WheelPower);
  CHECK(s2.params.signed_drag);
  CHECK(caught([&] { apply_overrides(s2, {{"gamma", "1"}}); }).first == ErrorKind::Parse);
  CHECK(caught([&] { apply_overrides(s2, {{"alpha", "ten"}}); }).first == ErrorKind::Parse);
  CHECK(caught([&] { apply_overrides(s2, {{"delta", "-1"}}); }).first == ErrorKind::Validation);
  CHECK(caught([] { load_scenario("/nonexistent/nowhere"); }).first == ErrorKind::Io);
}

TEST_CASE("dump and load round trip exactly") {
  for (const auto& name : fixture_names()) {
    const auto fx = make_fixture(name);
    const auto dir = scratch("dump_" + name);
    dump_scenario(fx, dir);
    const auto back = load_scenario(dir.string());

    REQUIRE(back.track.points().size() == fx.track.points().size());
    for (std::size_t i = 0; i < fx.track.points().size(); ++i) {
      CHECK(back.track.points()[i].s == fx.track.points()[i].s);
      CHECK(back.track.points()[i].slope == fx.track.points()[i].slope);
      CHECK(back.track.points()[i].safety_speed == fx.track.points()[i].safety_speed);
    }
    auto same = [](std::span<const double> a, std::span<const double> b) {
      return std::equal(a.begin(), a.end(), b.begin(), b.end());
    };
    CHECK(same(back.wind.positions(), fx.wind.positions()));
    CHECK(same(back.wind.times(), fx.wind.times()));
    CHECK(same(back.wind.values(), fx.wind.values()));
    CHECK(params_to_json(back.params, back.power) == params_to_json(fx.params, fx.power));
    CHECK(controller_to_json(back.controller) == controller_to_json(fx.controller));
    CHECK(back.controller.duration == fx.controller.duration);
    CHECK(back.params.drag == fx.params.drag);
    fs::remove_all(dir);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(7.0) == "7");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(104189.0) == "104189");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("reports") {
  const auto sc = short_flat();
  const auto r1 = run_race(sc.track, sc.wind, sc.params, sc.power, sc.controller);
  const auto r2 = run_race(sc.track, sc.wind, sc.params, sc.power, sc.controller);
  const auto d1 = scratch("report1"), d2 = scratch("report2");
  emit_report(r1, sc, d1);
  emit_report(r2, sc, d2);
  for (const char* f : {"telemetry.csv", "summary.json", "speed_trace.csv"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const auto tel = slurp(d1 / "telemetry.csv");
  CHECK(tel.rfind("t_s,x1_m,x2_mps,u,N,E_J,Va_mps,Vb_mps,flag\n", 0) == 0);
  CHECK(slurp(d1 / "speed_trace.csv").rfind("t_s,x2_mps,Va_mps,Vb_mps,u\n", 0) == 0);
  const auto summary = slurp(d1 / "summary.json");
  for (const char* key : {"finish_time_s", "total_energy_J", "switches", "min_switch_gap_s",
                          "avg_speed_mps", "flags"})
    CHECK(contains(summary, std::string("\"") + key + "\""));

  CHECK(caught([&] { emit_report(r1, sc, "/proc/forbidden/dir"); }).first == ErrorKind::Io);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("zero-length race report") {
  auto sc = make_fixture("flat16500");
  sc.track = TrackProfile::flat(0.0, 12.0);
  sc.controller.length = 0.0;
  const auto r = run_race(sc.track, sc.wind, sc.params, sc.power, sc.controller);
  const auto rows = parse_telemetry_csv(telemetry_csv(r));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].state.t == 0.0);
  CHECK(rows[0].state.energy == 10.0);
  CHECK(rows[0].state.switches == 1);
  CHECK(contains(summary_json(r.summary), "\"min_switch_gap_s\": null"));
}

TEST_CASE("output directory override") {
  ::unsetenv("ECODRIVE_OUT");
  CHECK(resolve_output_dir("out/x") == fs::path("out/x"));
  ::setenv("ECODRIVE_OUT", "/tmp/elsewhere", 1);
  CHECK(resolve_output_dir("out/x") == fs::path("/tmp/elsewhere"));
  ::unsetenv("ECODRIVE_OUT");
}

TEST_CASE("flat race summary") {
  const auto sc = load_scenario("flat16500");
  const auto r = run_race(sc.track, sc.wind, sc.params, sc.power, sc.controller);
  CHECK(r.summary.avg_speed == doctest::Approx(7.0).epsilon(0.005));
}
