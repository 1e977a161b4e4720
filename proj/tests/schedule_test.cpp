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

#include <gtest/gtest.h>

#include <sstream>

#include "ebus/branch_and_bound.hpp"
#include "ebus/oracle.hpp"
#include "ebus/schedule.hpp"
#include "test_util.hpp"

namespace ebus {
namespace {

// One bus, one 40 kW charger, 5-minute steps and one 1-mile trip at
// 40/12 kWh per mile: the trip costs exactly one charging step.
FleetInstance one_step_trip() {
  FleetInstance inst = testing::small_instance(5);
  inst.efficiency_kwh_per_mile = 40.0 / 12.0;
  inst.buses.push_back(testing::make_bus("B1", 10, 50, 100));
  inst.trips.push_back(make_trip("t1", "r", 10 * 60, 10 * 60 + 5, 1.0,
                                 inst.efficiency_kwh_per_mile, inst.grid));
  return inst;
}

struct Solved {
  FleetInstance inst;
  MilpProblem prob;
  MipResult result;
  Schedule sched;
};

Solved solve(const FleetInstance& inst) {
  Solved s{inst, assemble(inst), {}, {}};
  s.result = branch_and_bound(s.prob);
  if (!s.result.values.size()) return s;
  s.sched = decode(inst, s.prob.index, s.result.values);
  return s;
}

Solved tiny_solved(std::uint64_t seed, bool solar = true) {
  InstanceGenConfig cfg;
  cfg.buses = {2, 2};
  cfg.trips = {2, 4};
  if (solar) cfg.solar = SolarProfile::kBell;
  for (;; ++seed) {
    Solved s = solve(gen_instance(cfg, seed).instance);
    if (s.result.status == MipStatus::kOptimal) return s;
  }
}

TEST(Decode, CheapestChargeCostsOneOffPeakStep) {
  const Solved s = solve(one_step_trip());
  ASSERT_EQ(s.result.status, MipStatus::kOptimal);
  const double q = 40.0 * 5.0 / 60.0;
  EXPECT_NEAR(q, 3.3333, 1e-4);
  EXPECT_NEAR(s.result.objective, q * 0.08422, 1e-9);
  EXPECT_NEAR(cost_of(s.inst, s.sched), 0.280733, 1e-6);
  EXPECT_TRUE(validate(s.inst, s.sched).ok());
  // Trip step 120 (10:00) is driven; exactly one step is charged.
  EXPECT_EQ(s.sched.at(0, 120).trips, std::vector<int>{0});
  int charged = 0;
  for (int t = 0; t < s.sched.steps; ++t) charged += s.sched.at(0, t).charging;
  EXPECT_EQ(charged, 1);
}

TEST(Decode, EncodeIsItsInverse) {
  const Solved s = tiny_solved(3);
  const Eigen::VectorXd x = encode(s.inst, s.prob.index, s.sched);
  EXPECT_EQ(decode(s.inst, s.prob.index, x).activity, s.sched.activity);
  EXPECT_LE((x - s.result.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Decode, DrivingAndChargingAtOnceThrows) {
  const Solved s = tiny_solved(5);
  Eigen::VectorXd x = s.result.values;
  const VariableIndex& idx = s.prob.index;
  const Trip& trip = s.inst.trips[0];
  for (int k = 0; k < idx.buses(); ++k) {
    if (x[idx.x(0, k, trip.start_step)] > 0.5) {
      x[idx.z(k, trip.start_step)] = 1.0;
    }
  }
  EXPECT_THROW(decode(s.inst, idx, x), DecodeError);
}

TEST(Validate, SolverScheduleIsClean) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Solved s = tiny_solved(seed * 17);
    const ValidationReport report = validate(s.inst, s.sched);
    EXPECT_TRUE(report.ok()) << report.violations.front().message;
  }
}

TEST(Validate, TwoBusesOnOneTripStepFlags1c) {
  const Solved s = tiny_solved(11);
  Schedule bad = s.sched;
  const Trip& trip = s.inst.trips[0];
  const int t = trip.start_step;
  for (int k = 0; k < bad.buses; ++k) {
    if (bad.at(k, t).trips.empty() && !bad.at(k, t).charging) {
      bad.at(k, t).trips.push_back(0);
    }
  }
  const ValidationReport report = validate(s.inst, bad);
  EXPECT_TRUE(report.has(Family::k1c));
}

TEST(Validate, SolarAboveForecastFlags1l) {
  const Solved s = tiny_solved(2);
  Schedule bad = s.sched;
  bad.solar[1] = s.inst.solar.energy_per_step[1] + 1.0;
  EXPECT_TRUE(validate(s.inst, bad).has(Family::k1l));
}

TEST(Validate, DroppingAChargingStepBreaksTheBalance) {
  const Solved s = solve(one_step_trip());
  Schedule bad = s.sched;
  for (int t = 0; t < bad.steps; ++t) {
    Activity& a = bad.at(0, t);
    if (a.charging) {
      a.charging = false;
      a.chargers.clear();
      break;
    }
  }
  const ValidationReport report = validate(s.inst, bad);
  EXPECT_TRUE(report.has(Family::k1g) || report.has(Family::k1n));
  EXPECT_TRUE(report.has(Family::k1h));
}

TEST(Validate, ReportsDistinctFamiliesInOrder) {
  const Solved s = tiny_solved(4);
  Schedule bad = s.sched;
  bad.grid[0] = -1.0;
  bad.energy(0, bad.steps) += 1.0;
  const auto families = validate(s.inst, bad).families();
  ASSERT_GE(families.size(), 2u);
  EXPECT_NE(std::find(families.begin(), families.end(), Family::k1n),
            families.end());
  EXPECT_NE(std::find(families.begin(), families.end(), Family::kGridNonneg),
            families.end());
}

TEST(Families, LabelsRoundTrip) {
  for (Family f : kAllFamilies) {
    EXPECT_EQ(family_from_string(to_string(f)), f);
  }
  EXPECT_EQ(to_string(Family::kGridNonneg), "V-nonneg");
  EXPECT_FALSE(family_from_string("1z").has_value());
}

TEST(SettlePower, SolarFirstThenGrid) {
  FleetInstance inst = one_step_trip();
  inst.solar = make_solar(std::vector<double>(288, 12.0), inst.grid);  // 1 kWh
  Schedule sched(1, 288);
  sched.at(0, 5).charging = true;
  sched.at(0, 5).chargers = {0};
  settle_power(inst, sched);
  EXPECT_NEAR(sched.solar[5], 1.0, 1e-12);
  EXPECT_NEAR(sched.grid[5], 40.0 / 12.0 - 1.0, 1e-12);
  EXPECT_EQ(sched.grid[6], 0.0);
  EXPECT_EQ(sched.solar[6], 0.0);
}

TEST(Baseline, ValidAndNeverBelowTheOptimum) {
  InstanceGenConfig cfg;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const FleetInstance inst = gen_instance(cfg, seed).instance;
    const auto base = baseline_charge_on_return(inst);
    if (!base) continue;
    ++compared;
    EXPECT_TRUE(validate(inst, *base).ok());
    for (int k = 0; k < base->buses; ++k) {
      EXPECT_NEAR(base->energy(k, base->steps), inst.buses[k].e_init, 1e-9);
    }
    const MipResult r = branch_and_bound(assemble(inst));
    ASSERT_EQ(r.status, MipStatus::kOptimal);
    EXPECT_GE(cost_of(inst, *base), r.objective - 1e-6);
  }
  EXPECT_GT(compared, 20);
}

TEST(Baseline, ReportsWhyItFails) {
  FleetInstance inst = one_step_trip();
  inst.chargers.clear();
  std::string why;
  EXPECT_FALSE(baseline_charge_on_return(inst, &why).has_value());
  EXPECT_FALSE(why.empty());
}

TEST(BruteForce, MatchesTheHandComputedOptimum) {
  FleetInstance inst = testing::small_instance(90);
  inst.buses.push_back(testing::make_bus("B1", 0, 60, 60));
  inst.trips.push_back(make_trip("t", "r", 13 * 60 + 30, 15 * 60, 60, 1,
                                 inst.grid));
  // The bus starts full, so it recharges 60 kWh after the trip ends at
  // 15:00; the only later off-peak step starts at 22:30.
  const BruteForceResult bf = brute_force_optimum(inst);
  ASSERT_TRUE(bf.feasible);
  EXPECT_NEAR(bf.cost, 60 * 0.08422, 1e-9);
  EXPECT_TRUE(validate(inst, bf.schedule).ok());
  EXPECT_NEAR(cost_of(inst, bf.schedule), bf.cost, 1e-12);
}

TEST(BruteForce, RejectsOversizedInstances) {
  FleetInstance inst = testing::small_instance(60);  // T = 24
  inst.buses.push_back(testing::make_bus("B1", 0, 10, 20));
  EXPECT_THROW(brute_force_optimum(inst), std::invalid_argument);
}

TEST(Csv, ScheduleAndSeriesRoundTrip) {
  const Solved s = tiny_solved(9);
  Schedule settled = s.sched;
  std::ostringstream sched_os, series_os;
  write_schedule_csv(sched_os, s.inst, settled);
  write_series_csv(series_os, s.inst, settled);
  std::istringstream sched_is(sched_os.str()), series_is(series_os.str());
  Schedule back = read_schedule_csv(sched_is, s.inst);
  read_series_csv(series_is, s.inst, back);
  EXPECT_EQ(back.activity, settled.activity);
  EXPECT_LE((back.energy - settled.energy).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((back.grid - settled.grid).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((back.solar - settled.solar).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(validate(s.inst, back).ok());
}

TEST(Csv, HeadersAndClosingRow) {
  const Solved s = solve(one_step_trip());
  std::ostringstream os;
  write_schedule_csv(os, s.inst, s.sched);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("bus_id,step,wall_clock,activity,detail_id,energy_kwh\n",
                       0),
            0u);
  EXPECT_NE(text.find("B1,288,24:00,end,"), std::string::npos);
  EXPECT_NE(text.find("B1,120,10:00,trip,t1,"), std::string::npos);
  std::ostringstream series;
  write_series_csv(series, s.inst, s.sched);
  EXPECT_EQ(series.str().rfind(
                "step,wall_clock,total_charge_kw,grid_kw,solar_kw,"
                "price_per_kwh\n",
                0),
            0u);
}

TEST(Csv, MalformedRowNamesTheLine) {
  const FleetInstance inst = one_step_trip();
  std::istringstream is(
      "bus_id,step,wall_clock,activity,detail_id,energy_kwh\n"
      "B1,0,00:00,idle,,50\n"
      "B1,zero,00:05,idle,,50\n");
  try {
    read_schedule_csv(is, inst);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos)
        << e.what();
  }
}

}  // namespace
}  // namespace ebus
