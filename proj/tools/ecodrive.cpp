// Command-line front end: band optimization, race simulation, assumption
// checks, robustness analysis, parameter sweeps and report regeneration.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecodrive/controller.hpp"
#include "ecodrive/dynamics.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/harness.hpp"
#include "ecodrive/optimizer.hpp"
#include "ecodrive/robustness.hpp"

namespace fs = std::filesystem;
using namespace ecodrive;

namespace {

std::string num(double v) { return format_number(v); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SpeedProfileFunction read_profile(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<double> s, v;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "s_mps,value")
        throw Error(ErrorKind::Parse, path.string() + ": line 1: expected header 's_mps,value'");
      continue;
    }
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(line);
      std::size_t used = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      s.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      v.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse,
                  path.string() + ": line " + std::to_string(line_no) + ": malformed row");
    }
  }
  return SpeedProfileFunction::tabulated(std::move(s), std::move(v));
}

void print_band(const OscillationBand& b) {
  std::cout << "Va_mps " << num(b.va) << "\n"
            << "Vb_mps " << num(b.vb) << "\n"
            << "dwell_s " << num(b.dwell) << "\n"
            << "period_s " << num(b.period) << "\n"
            << "distance_m " << num(b.distance) << "\n"
            << "energy_J " << num(b.energy) << "\n"
            << "avg_cost_W " << num(b.avg_cost) << "\n"
            << "clamped " << (b.clamped ? "true" : "false") << "\n"
            << "coast " << (b.coast ? "true" : "false") << "\n";
}

Overrides to_overrides(const std::vector<std::string>& sets) {
  Overrides out;
  for (const auto& s : sets) out.push_back(parse_override(s));
  return out;
}

RaceResult simulate(const Scenario& sc) {
  return run_race(sc.track, sc.wind, sc.params, sc.power, sc.controller);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-optimal on/off speed bands and race simulation"};
  app.require_subcommand(1);

  // optimize
  auto* opt = app.add_subcommand("optimize", "Optimal band on a frozen slice");
  std::string params_path;
  double slope = 0.0, wind = 0.0, target = 7.0;
  double vsafe = std::numeric_limits<double>::infinity();
  double delta = kDefaultSafetyMargin;
  bool fine = false;
  opt->add_option("--params", params_path, "params.json")->required();
  opt->add_option("--slope", slope, "Slope [rad]")->required();
  opt->add_option("--wind", wind, "Wind along the track [m/s], negative = headwind")->required();
  opt->add_option("--target", target, "Target average speed [m/s]")->required();
  opt->add_option("--vsafe", vsafe, "Safety speed [m/s]");
  opt->add_option("--delta", delta, "Safety margin [m/s]");
  opt->add_flag("--fine", fine, "Refine the lower speed with a 0.01 m/s grid");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a full race");
  std::string scenario_src;
  std::vector<std::string> sets;
  std::string out_dir;
  sim->add_option("--scenario", scenario_src, "Scenario directory or fixture name")->required();
  sim->add_option("--set", sets, "key=value override");
  sim->add_option("--out", out_dir, "Output directory");

  // check-assumptions
  auto* chk = app.add_subcommand("check-assumptions", "Verify the structural assumptions");
  chk->add_option("--params", params_path, "params.json")->required();
  chk->add_option("--slope", slope, "Slope [rad]")->required();
  chk->add_option("--wind", wind, "Wind [m/s]")->required();

  // robustness
  auto* rob = app.add_subcommand("robustness", "Sensitivity of the mean speed to dg");
  std::string g_path, dg_path;
  int terms = kDefaultSeriesTerms;
  rob->add_option("--g", g_path, "CSV s_mps,value")->required();
  rob->add_option("--dg", dg_path, "CSV s_mps,value")->required();
  rob->add_option("--terms", terms, "Series terms")->check(CLI::NonNegativeNumber);

  // sweep
  auto* swp = app.add_subcommand("sweep", "Run one scenario over several values of a key");
  std::string vary;
  swp->add_option("--scenario", scenario_src, "Scenario directory or fixture name")->required();
  swp->add_option("--vary", vary, "key=a,b,c")->required();
  swp->add_option("--set", sets, "key=value override");
  swp->add_option("--out", out_dir, "Output directory");

  // report
  auto* rep = app.add_subcommand("report", "Recompute the summary of a finished run");
  std::string result_dir;
  rep->add_option("--result", result_dir, "Directory with telemetry.csv")->required();

  // dump-fixture
  auto* dmp = app.add_subcommand("dump-fixture", "Write a bundled fixture as scenario files");
  std::string fixture, dump_dir;
  dmp->add_option("name", fixture, "flat16500, hill or gust")->required();
  dmp->add_option("dir", dump_dir, "Target directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*opt) {
      const auto pf = read_params_json(params_path);
      const FrozenDynamics frozen(pf.params, pf.power, slope, wind);
      const auto grid = fine ? GridSpec::fine() : GridSpec::coarse();
      std::cout << "V_low_mps " << num(frozen.v_low()) << "\n"
                << "V_high_mps " << num(frozen.v_high()) << "\n";
      print_band(optimal_band(frozen, target, vsafe, grid, delta));
    } else if (*sim) {
      const auto sc = load_scenario(scenario_src, to_overrides(sets));
      const auto result = simulate(sc);
      const auto dir = resolve_output_dir(out_dir.empty() ? sc.output_dir : fs::path(out_dir));
      emit_report(result, sc, dir);
      std::cout << summary_json(result.summary);
      std::cerr << "report written to " << dir.string() << "\n";
    } else if (*chk) {
      const auto pf = read_params_json(params_path);
      const FrozenDynamics frozen(pf.params, pf.power, slope, wind);
      const auto report = check_assumptions(frozen);
      std::cout << "V_low_mps " << num(frozen.v_low()) << "\n"
                << "V_high_mps " << num(frozen.v_high()) << "\n";
      for (const auto* item : report.items())
        std::cout << item->name << ": " << to_string(item->verdict) << " (witness "
                  << num(item->witness) << "; " << item->detail << ")\n";
      std::cout << "overall: " << (report.pass() ? "pass" : "fail") << "\n";
    } else if (*rob) {
      const auto g = read_profile(g_path);
      const auto dg = read_profile(dg_path);
      const double base = mean_speed(g);
      const double direct = mean_speed(g.plus(dg)) - base;
      const auto stats = ratio_stats(g, dg);
      std::cout << "F_g_mps " << num(base) << "\n"
                << "dF_direct_mps " << num(direct) << "\n";
      for (int n = 1; n <= terms; n *= 2) {
        const double partial = perturbation_series(g, dg, n);
        std::cout << "dF_series_" << n << "_mps " << num(partial) << " residual "
                  << num(std::abs(partial - direct)) << "\n";
      }
      std::cout << "sup_ratio " << num(stats.sup) << "\n"
                << "mean_ratio " << num(stats.mean) << "\n"
                << "variance_ratio " << num(stats.variance) << "\n";
    } else if (*swp) {
      const auto [key, list] = parse_override(vary);
      std::vector<std::string> values;
      std::stringstream ss(list);
      for (std::string v; std::getline(ss, v, ',');)
        if (!v.empty()) values.push_back(v);
      if (values.empty()) throw Error(ErrorKind::Parse, "--vary needs at least one value");

      const auto base_overrides = to_overrides(sets);
      std::vector<Scenario> scenarios;
      for (const auto& v : values) {
        auto ov = base_overrides;
        ov.emplace_back(key, v);
        scenarios.push_back(load_scenario(scenario_src, ov));
      }
      std::vector<std::future<RaceResult>> jobs;
      for (const auto& sc : scenarios)
        jobs.push_back(std::async(std::launch::async, [&sc] { return simulate(sc); }));
      std::vector<RaceResult> results;
      for (auto& j : jobs) results.push_back(j.get());

      const fs::path root =
          resolve_output_dir(out_dir.empty() ? fs::path("out") / (scenarios[0].name + "_sweep")
                                             : fs::path(out_dir));
      std::cout << key << ",finish_time_s,total_energy_J,switches,min_switch_gap_s,avg_speed_mps,flags\n";
      for (std::size_t i = 0; i < values.size(); ++i) {
        emit_report(results[i], scenarios[i], root / (key + "=" + values[i]));
        const auto& s = results[i].summary;
        std::string flag_list;
        for (const auto& f : s.flags) flag_list += (flag_list.empty() ? "" : "|") + f;
        std::cout << values[i] << "," << num(s.finish_time) << "," << num(s.total_energy) << ","
                  << s.switches << "," << (s.min_switch_gap ? num(*s.min_switch_gap) : "") << ","
                  << num(s.avg_speed) << "," << flag_list << "\n";
      }
    } else if (*rep) {
      RaceResult result;
      result.telemetry = parse_telemetry_csv(slurp(fs::path(result_dir) / "telemetry.csv"));
      if (result.telemetry.empty()) throw Error(ErrorKind::Validation, "telemetry is empty");
      result.summary = summarize(result);
      std::cout << summary_json(result.summary);
    } else if (*dmp) {
      dump_scenario(make_fixture(fixture), dump_dir);
      std::cout << "wrote " << fixture << " to " << dump_dir << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
