#include "ecodrive/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ecodrive/error.hpp"

namespace ecodrive {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += '|';
    out += p;
  }
  return out;
}

std::vector<std::string> split_flags(const std::string& flag) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= flag.size()) {
    const auto end = flag.find('|', start);
    const auto piece = flag.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!piece.empty()) out.push_back(piece);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

bool is_anomaly(const std::string& f) {
  return f == flags::kSafety || f == flags::kUnreachable || f == flags::kInfeasibleSlice ||
         f == flags::kOvertime || f == flags::kStalled || f == flags::kTimeout;
}

}  // namespace

void ControllerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::Validation, std::string("controller: ") + what);
  };
  require(replan_interval > 0.0, "replan interval must be > 0");
  require(delta > 0.0, "safety margin delta must be > 0");
  require(length >= 0.0, "race length must be >= 0");
  require(duration > 0.0, "race duration must be > 0");
  require(dt > 0.0 && dt < replan_interval, "dt must satisfy 0 < dt < replan interval");
  require(overshoot_slack >= 0.0, "overshoot slack must be >= 0");
  require(hard_cap_factor >= 1.0, "hard cap factor must be >= 1");
  require(trace_interval > 0.0, "trace interval must be > 0");
  require(grid.dichotomy_tol > 0.0, "dichotomy tolerance must be > 0");
  require(!grid.offsets.empty(), "candidate grid must be nonempty");
}

bool RaceResult::has_flag(const std::string& flag) const {
  return std::find(summary.flags.begin(), summary.flags.end(), flag) != summary.flags.end();
}

double target_speed(const RaceState& state, const ControllerConfig& cfg) {
  const double remaining_time = cfg.duration - state.t;
  if (remaining_time <= 0.0) return kInf;
  return (cfg.length - state.x1) / remaining_time;
}

ReplanOutcome replan(const RaceState& state, const TrackProfile& track,
                     const WindField& wind, const VehicleParams& params,
                     const PowerModel& power, const ControllerConfig& cfg) {
  ReplanOutcome out;
  out.target = target_speed(state, cfg);
  if (!std::isfinite(out.target)) out.flags.push_back(flags::kOvertime);
  const double x1 = std::clamp(state.x1, 0.0, track.length());
  const double vsafe = track.safety_speed_at(x1);

  auto edge_band = [&](const FrozenDynamics* frozen, double top) {
    OscillationBand b;
    if (frozen) {
      b = band_between(*frozen, std::max(top - cfg.delta, 0.0), top);
    } else {
      b.va = std::max(top - cfg.delta, 0.0);
      b.vb = top;
      b.period = kInf;
      b.avg_cost = power(top, Engine::On, params);
    }
    return b;
  };

  std::optional<FrozenDynamics> frozen;
  try {
    frozen.emplace(freeze(track, wind, params, power, x1, state.t));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InfeasibleSlice) throw;
    // The engine cannot win against the slope here: push as hard as allowed
    // and let momentum carry the vehicle.
    out.band = edge_band(nullptr, vsafe);
    out.band.clamped = true;
    out.flags.push_back(flags::kInfeasibleSlice);
    return out;
  }

  const double vh = frozen->v_high();
  auto maximal = [&] {
    // Lower edge below the equilibrium as usual, but the engine is only cut
    // at the safety speed: above V_high on a climb it still slows the loss.
    const double top = std::min(vh, vsafe);
    out.band = edge_band(&*frozen, top);
    out.band.vb = vsafe;
    out.band.clamped = top < vh;
    out.flags.push_back(flags::kUnreachable);
  };

  if (out.target >= vh) {
    maximal();
  } else if (out.target >= vsafe) {
    out.band = edge_band(&*frozen, vsafe);
    out.band.clamped = true;
  } else {
    try {
      out.band = optimal_band(*frozen, out.target, vsafe, cfg.grid, cfg.delta);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InfeasibleTarget) throw;
      maximal();
    }
  }
  return out;
}

Engine switch_logic(RaceState& state, const OscillationBand& band, double switch_cost) {
  if (state.u == Engine::On && state.x2 >= band.vb) {
    state.u = Engine::Off;
  } else if (state.u == Engine::Off && state.x2 <= band.va) {
    state.u = Engine::On;
    ++state.switches;
    state.energy += switch_cost;
  }
  return state.u;
}

RaceResult run_race(const TrackProfile& track, const WindField& wind,
                    const VehicleParams& params, const PowerModel& power,
                    const ControllerConfig& cfg) {
  params.validate();
  cfg.validate();
  if (std::abs(cfg.length - track.length()) > 1e-9 * std::max(1.0, track.length()))
    throw Error(ErrorKind::Validation, "controller: race length differs from track length");

  RaceResult res;
  RaceState state;
  state.u = Engine::On;
  state.switches = 1;
  state.energy = params.switch_cost;

  if (cfg.length <= 0.0) {
    res.telemetry.push_back({state, 0.0, 0.0, join({flags::kStart, flags::kFinish})});
    res.trace.push_back({0.0, 0.0, 0.0, 0.0, state.u});
    res.finished = true;
    res.summary = summarize(res);
    return res;
  }

  const long steps_per_replan = std::max(1L, std::lround(cfg.replan_interval / cfg.dt));
  const long steps_per_trace = std::max(1L, std::lround(cfg.trace_interval / cfg.dt));
  const double hard_cap = cfg.hard_cap_factor * cfg.duration;

  OscillationBand band;
  double stall_time = 0.0;
  std::string end_flag = flags::kTimeout;

  for (long step = 0;; ++step) {
    std::vector<std::string> row_flags;
    if (step == 0) row_flags.push_back(flags::kStart);

    if (step % steps_per_replan == 0) {
      auto outcome = replan(state, track, wind, params, power, cfg);
      band = outcome.band;
      res.replans.push_back({state.t, outcome.target, band});
      row_flags.push_back(flags::kReplan);
      for (auto& f : outcome.flags) row_flags.push_back(std::move(f));
    }

    const Engine before = state.u;
    switch_logic(state, band, params.switch_cost);
    if (state.u == Engine::On && state.x2 > track.safety_speed_at(std::min(state.x1, track.length()))) {
      state.u = Engine::Off;  // hard override, the band alone can overshoot
      row_flags.push_back(flags::kSafety);
    }
    if (state.u != before) row_flags.push_back(state.u == Engine::On ? flags::kOn : flags::kOff);
    if (!row_flags.empty()) res.telemetry.push_back({state, band.va, band.vb, join(row_flags)});
    if (step % steps_per_trace == 0)
      res.trace.push_back({state.t, state.x2, band.va, band.vb, state.u});

    const double e_before = state.energy;
    state = integrate(state, state.u, cfg.dt, track, wind, params, power);
    res.engine_energy += state.energy - e_before;

    if (state.x1 >= track.length()) {
      end_flag = flags::kFinish;
      res.finished = true;
      break;
    }
    if (state.x2 == 0.0 && state.u == Engine::On) {
      stall_time += cfg.dt;
      if (stall_time > cfg.replan_interval) {
        end_flag = flags::kStalled;
        break;
      }
    } else {
      stall_time = 0.0;
    }
    if (state.t >= hard_cap) break;
  }

  res.telemetry.push_back({state, band.va, band.vb, end_flag});
  res.trace.push_back({state.t, state.x2, band.va, band.vb, state.u});
  res.summary = summarize(res);
  return res;
}

std::vector<double> switch_times(const RaceResult& result) {
  std::vector<double> times;
  for (const auto& row : result.telemetry) {
    const auto parts = split_flags(row.flag);
    const bool is_switch = std::any_of(parts.begin(), parts.end(), [](const std::string& f) {
      return f == flags::kStart || f == flags::kOn || f == flags::kOff;
    });
    if (is_switch) times.push_back(row.state.t);
  }
  return times;
}

double min_switch_interval(const RaceResult& result) {
  const auto times = switch_times(result);
  if (times.size() < 2)
    throw Error(ErrorKind::NotApplicable, "fewer than two engine switches");
  double gap = kInf;
  for (std::size_t i = 1; i < times.size(); ++i) gap = std::min(gap, times[i] - times[i - 1]);
  return gap;
}

RaceSummary summarize(const RaceResult& result) {
  RaceSummary s;
  if (result.telemetry.empty()) return s;
  const auto& last = result.telemetry.back().state;
  s.finish_time = last.t;
  s.total_energy = last.energy;
  s.switches = last.switches;
  s.avg_speed = last.t > 0.0 ? last.x1 / last.t : 0.0;
  if (switch_times(result).size() >= 2) s.min_switch_gap = min_switch_interval(result);
  std::set<std::string> seen;
  for (const auto& row : result.telemetry)
    for (const auto& f : split_flags(row.flag))
      if (is_anomaly(f)) seen.insert(f);
  s.flags.assign(seen.begin(), seen.end());
  return s;
}

}  // namespace ecodrive
