// Copyright 2026 The ebus-dispatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance driver: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ebus/branch_and_bound.hpp"
#include "ebus/fleet.hpp"
#include "ebus/milp.hpp"
#include "ebus/oracle.hpp"
#include "ebus/report.hpp"
#include "ebus/schedule.hpp"

namespace {

using namespace ebus;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Oracle-sized instance; odd seeds carry bell solar.
FleetInstance tiny(std::uint64_t seed) {
  InstanceGenConfig cfg;
  if (seed % 2 == 1) cfg.solar = SolarProfile::kBell;
  return gen_instance(cfg, seed).instance;
}

struct Solved {
  std::uint64_t seed = 0;
  FleetInstance inst;
  MipResult mip;
  std::optional<Schedule> sched;  // decoded incumbent
};

Solved solve(std::uint64_t seed, const FleetInstance& inst) {
  Solved s;
  s.seed = seed;
  s.inst = inst;
  const MilpProblem prob = assemble(inst);
  s.mip = branch_and_bound(prob);
  if (s.mip.values.size() > 0) {
    s.sched = decode(inst, prob.index, s.mip.values);
  }
  return s;
}

// Solver schedules shared by criteria 3 to 5: the first 100 seeds that
// have a feasible plan.
const std::vector<Solved>& feasible_pool() {
  static const std::vector<Solved> pool = [] {
    std::vector<Solved> out;
    for (std::uint64_t seed = 0; out.size() < 100; ++seed) {
      Solved s = solve(seed, tiny(seed));
      if (s.mip.status == MipStatus::kOptimal) out.push_back(std::move(s));
    }
    return out;
  }();
  return pool;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  int mismatches = 0;
  int feasible = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FleetInstance inst = tiny(seed);
    const Solved s = solve(seed, inst);
    const BruteForceResult bf = brute_force_optimum(inst);
    bool ok;
    if (!bf.feasible) {
      ok = s.mip.status == MipStatus::kInfeasible;
    } else {
      ++feasible;
      ok = s.mip.status == MipStatus::kOptimal &&
           std::abs(s.mip.objective - bf.cost) <= 1e-6;
    }
    if (!ok) {
      ++mismatches;
      if (first.empty()) {
        first = fmt("; seed %llu: solver %s %.9f vs brute force %.9f",
                    static_cast<unsigned long long>(seed),
                    std::string(to_string(s.mip.status)).c_str(),
                    s.mip.objective, bf.cost);
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed <= 120.0,
          fmt("100 instances (%d feasible), %d mismatches, %.1f s of 120 s",
              feasible, mismatches, elapsed) +
              first};
}

Outcome solar_monotonicity() {
  InstanceGenConfig cfg;
  cfg.solar = SolarProfile::kBell;
  const double tol = SolveConfig{}.abs_gap_tol;
  int violations = 0;
  int strict = 0;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FleetInstance inst = gen_instance(cfg, seed).instance;
    const Solved with = solve(seed, inst);
    const Solved without = solve(seed, without_solar(inst));
    if (with.mip.status != MipStatus::kOptimal ||
        without.mip.status != MipStatus::kOptimal) {
      if (with.mip.status != without.mip.status) ++violations;
      continue;
    }
    ++compared;
    if (with.mip.objective > without.mip.objective + tol) ++violations;
    const bool overlaps = charge_in_solar_hours(inst, *without.sched) > 0.0;
    if (overlaps && with.mip.objective < without.mip.objective - 1e-9) {
      ++strict;
    }
  }
  return {violations == 0 && strict > 0,
          fmt("50 instances (%d feasible), %d violations, %d strictly cheaper "
              "with solar",
              compared, violations, strict)};
}

Outcome dominance() {
  int checked = 0;
  int violations = 0;
  for (const Solved& s : feasible_pool()) {
    const auto base = baseline_charge_on_return(s.inst);
    if (!base) continue;
    ++checked;
    if (cost_of(s.inst, *base) < s.mip.objective - 1e-6) ++violations;
  }
  return {checked > 0 && violations == 0,
          fmt("%d instances with a baseline plan, %d below the MILP optimum",
              checked, violations)};
}

Outcome validator() {
  int dirty = 0;
  for (const Solved& s : feasible_pool()) {
    if (!validate(s.inst, *s.sched).ok()) ++dirty;
  }
  std::ostringstream per_family;
  int missed = 0;
  int applied_total = 0;
  for (Family f : kAllFamilies) {
    int applied = 0;
    int flagged = 0;
    for (const Solved& s : feasible_pool()) {
      const auto bad = mutate(s.inst, *s.sched, f, s.seed);
      if (!bad) continue;
      ++applied;
      flagged += validate(s.inst, *bad).has(f);
    }
    if (applied == 0 || flagged != applied) ++missed;
    applied_total += applied;
    per_family << ' ' << to_string(f) << ' ' << flagged << '/' << applied;
  }
  return {dirty == 0 && missed == 0,
          fmt("%zu solver schedules, %d with violations; %d mutations, "
              "%d families not fully flagged;",
              feasible_pool().size(), dirty, applied_total, missed) +
              per_family.str()};
}

Outcome conservation() {
  double worst_balance = 0.0;
  double worst_power = 0.0;
  int schedules = 0;
  auto check = [&](const FleetInstance& inst, const Schedule& sched) {
    if (!validate(inst, sched).ok()) return;
    ++schedules;
    double consumed = 0.0;
    for (const Trip& t : inst.trips) consumed += t.energy();
    double charged = 0.0;
    double supplied = 0.0;
    for (int t = 0; t < sched.steps; ++t) {
      charged += sched.load(inst, t);
      supplied += sched.grid[t] + sched.solar[t];
    }
    worst_balance = std::max(worst_balance, std::abs(charged - consumed));
    worst_power = std::max(worst_power, std::abs(supplied - charged));
  };
  for (const Solved& s : feasible_pool()) {
    check(s.inst, *s.sched);
    if (auto base = baseline_charge_on_return(s.inst)) check(s.inst, *base);
  }
  return {schedules > 0 && worst_balance <= 1e-9 && worst_power <= 1e-9,
          fmt("%d validated schedules; max |charged - consumed| %.3g kWh, "
              "max |sum(V+S) - charged| %.3g kWh",
              schedules, worst_balance, worst_power)};
}

Outcome fixture_fidelity() {
  const fs::path data = EBUS_DATA_DIR;
  const RateSchedule rates = load_rates(data / "marguerite_rates.json");
  const TimeGrid grid = make_time_grid(5);
  struct Probe {
    const char* clock;
    double price;
  };
  const Probe probes[] = {{"00:00", 0.08422}, {"10:00", 0.11356},
                          {"13:00", 0.16127}, {"19:00", 0.11356},
                          {"23:00", 0.08422}};
  int wrong = 0;
  for (const Probe& p : probes) {
    const int step = parse_clock(p.clock, "probe") / grid.step_minutes;
    if (price_at(rates, step, grid) != p.price) ++wrong;
  }
  const auto routes = load_routes(data / "marguerite_routes.json");
  int trips = 0;
  double miles = 0.0;
  for (const RouteInfo& r : routes) {
    trips += r.daily_trips;
    miles += r.daily_trips * r.miles;
  }
  const bool routes_ok = trips == 352 && std::abs(miles - 1431.50) <= 1e-9;
  return {wrong == 0 && rates.intervals.size() == 5 && routes_ok,
          fmt("%d of 5 rate probes wrong; routes fixture %d trips, %.2f "
              "miles per day",
              wrong, trips, miles)};
}

Outcome desk_scale() {
  const FleetInstance inst =
      load_instance(fs::path(EBUS_DATA_DIR) / "marguerite_desk.json");
  int big = 0;
  for (const Bus& b : inst.buses) big += b.model != "K7";
  bool shape = inst.num_steps() == 288 && inst.buses.size() == 6 &&
               inst.chargers.size() == 12 && inst.rates == table_i_rates() &&
               inst.trips.size() >= 50 && inst.trips.size() <= 70 && big > 0 &&
               big < 6;
  for (const Charger& c : inst.chargers) shape = shape && c.power_kw == 40.0;

  SolveConfig config;
  config.rel_gap_tol = 0.01;
  config.time_limit = 600.0;
  const auto start = Clock::now();
  const auto results = run_compare(inst, config);
  const double elapsed = seconds_since(start);
  const ScenarioResult& base = results[0];
  const ScenarioResult& dark = results[1];
  const ScenarioResult& lit = results[2];
  const bool solved = dark.has_plan() && lit.has_plan() &&
                      dark.gap <= 0.01 && lit.gap <= 0.01 &&
                      dark.validation.ok() && lit.validation.ok();
  const bool chain = solved && base.has_plan() &&
                     base.cost >= dark.cost - 1e-6 &&
                     dark.cost >= lit.cost - 1e-6;
  const double dark_solar = solved ? charge_in_solar_hours(inst, *dark.schedule) : 0;
  const double lit_solar = solved ? charge_in_solar_hours(inst, *lit.schedule) : 0;
  const std::string table = comparison_table(results);
  std::printf("%s", table.c_str());
  return {shape && solved && chain && elapsed <= 600.0 &&
              lit_solar > dark_solar,
          fmt("%zu trips; costs %.4f / %.4f / %.4f; gaps %.4f / %.4f; "
              "%.1f s of 600 s; solar-hour charging %.1f kWh with solar vs "
              "%.1f kWh without",
              inst.trips.size(), base.cost, dark.cost, lit.cost, dark.gap,
              lit.gap, elapsed, lit_solar, dark_solar)};
}

std::string run_cli_export(const fs::path& out) {
  const std::string cmd = std::string("\"") + EBUS_CLI + "\" --quiet " +
                          "export-mps --instance \"" EBUS_DATA_DIR
                          "/marguerite_desk.json\" --out \"" +
                          out.string() + "\"";
  if (std::system(cmd.c_str()) != 0) return {};
  std::ifstream is(out, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome mps_round_trip() {
  const FleetInstance inst =
      load_instance(fs::path(EBUS_DATA_DIR) / "marguerite_desk.json");
  const MilpProblem prob = assemble(inst);
  const MpsExport out = export_mps(prob);
  const MilpProblem back = parse_mps(out.text, out.name_map);
  const bool same_shape = back.num_rows() == prob.num_rows() &&
                          back.num_cols() == prob.num_cols() &&
                          back.matrix.nonZeros() == prob.matrix.nonZeros();
  bool identical = same_shape && back.objective == prob.objective &&
                   back.rhs == prob.rhs && back.lower == prob.lower &&
                   back.upper == prob.upper && back.senses == prob.senses &&
                   back.integer == prob.integer;
  if (identical) {
    const Eigen::SparseMatrix<double> diff =
        Eigen::SparseMatrix<double>(back.matrix) -
        Eigen::SparseMatrix<double>(prob.matrix);
    identical = diff.norm() == 0.0;
  }
  const bool in_process = export_mps(assemble(inst)).text == out.text;
  const fs::path dir = fs::temp_directory_path();
  const fs::path a = dir / "ebus_acceptance_a.mps";
  const fs::path b = dir / "ebus_acceptance_b.mps";
  const std::string text_a = run_cli_export(a);
  const std::string text_b = run_cli_export(b);
  const bool across_runs = !text_a.empty() && text_a == text_b &&
                           text_a == out.text;
  fs::remove(a);
  fs::remove(b);
  fs::remove(fs::path(a.string() + ".names"));
  fs::remove(fs::path(b.string() + ".names"));
  return {identical && in_process && across_runs,
          fmt("%d rows, %d columns, %ld nonzeros; re-parse %s; repeat export "
              "%s; separate CLI runs %s",
              prob.num_rows(), prob.num_cols(),
              static_cast<long>(prob.matrix.nonZeros()),
              identical ? "identical" : "differs",
              in_process ? "byte-identical" : "differs",
              across_runs ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "solar monotonicity", solar_monotonicity},
      {3, "dominance", dominance},
      {4, "validator soundness and completeness", validator},
      {5, "conservation", conservation},
      {6, "fixture fidelity", fixture_fidelity},
      {7, "desk-scale experiment", desk_scale},
      {8, "MPS round-trip", mps_round_trip},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.number)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d (%s): %s - %s\n", c.number, c.name,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
