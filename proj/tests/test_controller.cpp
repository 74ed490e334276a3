#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ecodrive/controller.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/harness.hpp"

using namespace ecodrive;

namespace {

constexpr double kL = 16500.0;
constexpr double kT = kL / 7.0;

RaceResult run(const Scenario& sc) {
  return run_race(sc.track, sc.wind, sc.params, sc.power, sc.controller);
}

const RaceResult& flat_result() {
  static const RaceResult r = run(make_fixture("flat16500"));
  return r;
}

bool has(const std::string& flag, const char* f) {
  std::size_t start = 0;
  while (true) {
    const auto end = flag.find('|', start);
    if (flag.substr(start, end - start) == f) return true;
    if (end == std::string::npos) return false;
    start = end + 1;
  }
}

}  // namespace

TEST_CASE("target speed from remaining distance and time") {
  ControllerConfig cfg;
  RaceState s;
  CHECK(target_speed(s, cfg) == doctest::Approx(7.0).epsilon(1e-12));
  s.x1 = kL / 2;
  s.t = kT / 2;
  CHECK(target_speed(s, cfg) == doctest::Approx(7.0).epsilon(1e-12));
  s.x1 = 8250.0;
  s.t = 1238.5;
  CHECK(target_speed(s, cfg) == doctest::Approx(7.38).epsilon(1e-3));
  CHECK(target_speed(s, cfg) == doctest::Approx(8250.0 / (kT - 1238.5)).epsilon(1e-14));
  s.t = kT;
  CHECK(std::isinf(target_speed(s, cfg)));
}

TEST_CASE("hysteresis state machine") {
  OscillationBand band;
  band.va = 6.0;
  band.vb = 8.0;
  RaceState s;
  s.switches = 3;
  s.energy = 100.0;

  s.u = Engine::On;
  s.x2 = 8.0;
  CHECK(switch_logic(s, band, 10.0) == Engine::Off);
  CHECK(s.switches == 3);
  CHECK(s.energy == 100.0);

  s.x2 = 7.0;
  CHECK(switch_logic(s, band, 10.0) == Engine::Off);
  s.u = Engine::On;
  CHECK(switch_logic(s, band, 10.0) == Engine::On);

  s.u = Engine::Off;
  s.x2 = 6.0;
  CHECK(switch_logic(s, band, 10.0) == Engine::On);
  CHECK(s.switches == 4);
  CHECK(s.energy == 110.0);
  // Staying on below va is not a new switch.
  CHECK(switch_logic(s, band, 10.0) == Engine::On);
  CHECK(s.switches == 4);
}

TEST_CASE("config validation") {
  ControllerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [](auto mutate) {
    ControllerConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Validation;
    }
    return false;
  };
  CHECK(bad([](ControllerConfig& c) { c.replan_interval = 0.0; }));
  CHECK(bad([](ControllerConfig& c) { c.delta = -1.0; }));
  CHECK(bad([](ControllerConfig& c) { c.dt = 3.0; }));
  CHECK(bad([](ControllerConfig& c) { c.duration = 0.0; }));
  CHECK(bad([](ControllerConfig& c) { c.grid.offsets.clear(); }));
}

TEST_CASE("replan outcomes") {
  const auto sc = make_fixture("flat16500");
  RaceState s;
  auto out = replan(s, sc.track, sc.wind, sc.params, sc.power, sc.controller);
  CHECK(out.target == doctest::Approx(7.0));
  CHECK(out.flags.empty());
  CHECK(out.band.va == doctest::Approx(6.0).epsilon(1e-12));

  // Behind schedule beyond the safety speed: clamped band.
  s.t = kT - 100.0;
  s.x1 = kL - 1250.0;
  out = replan(s, sc.track, sc.wind, sc.params, sc.power, sc.controller);
  CHECK(out.band.clamped);
  CHECK(out.band.va == doctest::Approx(11.5));
  CHECK(out.band.vb == doctest::Approx(12.0));

  // Beyond V_high: unreachable.
  s.x1 = kL - 2000.0;
  out = replan(s, sc.track, sc.wind, sc.params, sc.power, sc.controller);
  CHECK(std::find(out.flags.begin(), out.flags.end(), flags::kUnreachable) != out.flags.end());

  // Past the deadline.
  s.t = kT + 1.0;
  out = replan(s, sc.track, sc.wind, sc.params, sc.power, sc.controller);
  CHECK(std::find(out.flags.begin(), out.flags.end(), flags::kOvertime) != out.flags.end());
}

TEST_CASE("zero-length race") {
  auto sc = make_fixture("flat16500");
  sc.track = TrackProfile::flat(0.0, 12.0);
  sc.controller.length = 0.0;
  const auto r = run(sc);
  REQUIRE(r.telemetry.size() == 1);
  CHECK(r.finished);
  CHECK(r.summary.total_energy == sc.params.switch_cost);
  CHECK(r.summary.switches == 1);
  CHECK_FALSE(r.summary.min_switch_gap.has_value());
  bool not_applicable = false;
  try {
    min_switch_interval(r);
  } catch (const Error& e) {
    not_applicable = e.kind() == ErrorKind::NotApplicable;
  }
  CHECK(not_applicable);
}

TEST_CASE("flat race") {
  const auto& r = flat_result();
  const auto sc = make_fixture("flat16500");
  REQUIRE(r.finished);
  CHECK(r.summary.flags.empty());
  CHECK(r.summary.avg_speed == doctest::Approx(7.0).epsilon(0.005));
  CHECK(r.summary.finish_time <= kT * 1.2);

  SUBCASE("cost bookkeeping identity") {
    const auto& last = r.telemetry.back().state;
    CHECK(last.energy == doctest::Approx(r.engine_energy + sc.params.switch_cost * last.switches)
                             .epsilon(1e-12));
  }

  SUBCASE("hysteresis edges in telemetry") {
    const double eps = 0.2 * sc.controller.dt + 1e-12;  // max |f| times dt
    for (const auto& row : r.telemetry) {
      if (has(row.flag, flags::kOn)) CHECK(row.state.x2 <= row.va + eps);
      if (has(row.flag, flags::kOff) && !has(row.flag, flags::kSafety))
        CHECK(row.state.x2 >= row.vb - eps);
    }
  }

  SUBCASE("state invariants") {
    double e = 0.0;
    long n = 0;
    for (const auto& row : r.telemetry) {
      CHECK(row.state.x2 >= 0.0);
      CHECK(row.state.x2 <= sc.track.safety_speed_at(std::min(row.state.x1, kL)) + 0.2);
      CHECK(row.state.energy >= e);
      CHECK(row.state.switches >= n);
      e = row.state.energy;
      n = row.state.switches;
    }
  }

  SUBCASE("no Zeno") {
    double max_cost = 0.0;
    for (const auto& rp : r.replans) max_cost = std::max(max_cost, rp.band.avg_cost);
    const double gap = min_switch_interval(r);
    CHECK(gap >= 1.0);
    CHECK(gap > sc.params.switch_cost / max_cost);
  }

  SUBCASE("summary recomputable from telemetry") {
    RaceResult only;
    only.telemetry = parse_telemetry_csv(telemetry_csv(r));
    // Telemetry carries 9 significant digits.
    const auto s = summarize(only);
    const double tol = 1e-8;
    CHECK(s.finish_time == doctest::Approx(r.summary.finish_time).epsilon(tol));
    CHECK(s.total_energy == doctest::Approx(r.summary.total_energy).epsilon(tol));
    CHECK(s.switches == r.summary.switches);
    CHECK(s.avg_speed == doctest::Approx(r.summary.avg_speed).epsilon(tol));
    REQUIRE(s.min_switch_gap.has_value());
    CHECK(*s.min_switch_gap == doctest::Approx(*r.summary.min_switch_gap).epsilon(1e-6));
    CHECK(s.flags == r.summary.flags);
  }
}

TEST_CASE("doubling the switching cost does not shorten the minimum switch gap") {
  auto sc = make_fixture("flat16500");
  sc.params.switch_cost *= 2.0;
  const auto doubled = run(sc);
  CHECK(min_switch_interval(doubled) >= min_switch_interval(flat_result()));
}

TEST_CASE("stall on an infeasible climb from rest") {
  auto sc = make_fixture("flat16500");
  sc.track = TrackProfile({{0.0, 0.03, 12.0}, {1000.0, 0.03, 12.0}});
  sc.controller.length = 1000.0;
  sc.controller.duration = 200.0;
  const auto r = run(sc);
  CHECK_FALSE(r.finished);
  CHECK(r.has_flag(flags::kStalled));
  CHECK(r.has_flag(flags::kInfeasibleSlice));
  CHECK(r.summary.finish_time < 10.0);
}

TEST_CASE("race length must match the track") {
  auto sc = make_fixture("flat16500");
  sc.controller.length = 1000.0;
  CHECK_THROWS_AS(run(sc), Error);
}
