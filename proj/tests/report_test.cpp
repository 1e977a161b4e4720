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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ebus/oracle.hpp"
#include "ebus/report.hpp"
#include "test_util.hpp"

namespace ebus {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("ebus_report_test_" + name + "_" +
                        std::to_string(::testing::UnitTest::GetInstance()
                                           ->random_seed()));
  fs::remove_all(dir);
  return dir;
}

TEST(Compare, DominanceChainOnSeededInstances) {
  InstanceGenConfig cfg;
  cfg.solar = SolarProfile::kBell;
  int full = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FleetInstance inst = gen_instance(cfg, seed).instance;
    const auto results = run_compare(inst, SolveConfig{});
    ASSERT_EQ(results.size(), 3u);
    EXPECT_EQ(results[0].label, "baseline");
    EXPECT_EQ(results[1].label, "no-solar");
    EXPECT_EQ(results[2].label, "with-solar");
    if (results[1].mip_status == MipStatus::kInfeasible) {
      EXPECT_EQ(results[2].mip_status, MipStatus::kInfeasible);
      continue;
    }
    EXPECT_LE(results[2].cost, results[1].cost + 1e-9);
    if (results[0].has_plan()) {
      ++full;
      EXPECT_GE(results[0].cost, results[1].cost - 1e-6);
    }
    for (const ScenarioResult& r : results) {
      if (r.has_plan()) {
        EXPECT_TRUE(r.validation.ok()) << r.label;
      }
    }
  }
  EXPECT_GT(full, 10);
}

TEST(Compare, ZeroSolarMakesTheMilpRowsEqual) {
  InstanceGenConfig cfg;
  const FleetInstance inst = gen_instance(cfg, 4).instance;
  const auto results = run_compare(inst, SolveConfig{});
  ASSERT_TRUE(results[1].has_plan());
  EXPECT_EQ(results[1].cost, results[2].cost);
}

TEST(Compare, EmptyTripsCostNothing) {
  FleetInstance inst = testing::small_instance(60);
  inst.buses.push_back(testing::make_bus("B1", 0, 10, 20));
  const auto results = run_compare(inst, SolveConfig{});
  for (const ScenarioResult& r : results) {
    ASSERT_TRUE(r.has_plan()) << r.label;
    EXPECT_EQ(r.cost, 0.0);
  }
  EXPECT_EQ(results[1].status, "optimal");
}

TEST(Compare, TableMarksMissingBaseline) {
  ScenarioResult base;
  base.label = kBaselineLabel;
  base.status = "n/a";
  ScenarioResult milp;
  milp.label = kNoSolarLabel;
  milp.status = "optimal";
  milp.schedule = Schedule(1, 4);
  milp.cost = 2.5;
  const std::string table = comparison_table({base, milp});
  EXPECT_NE(table.find("baseline    n/a"), std::string::npos) << table;
  EXPECT_NE(table.find("2.5000"), std::string::npos) << table;
  const auto doc = comparison_json({base, milp});
  EXPECT_TRUE(doc["cases"][0]["cost"].is_null());
  EXPECT_TRUE(doc["cases"][1]["savings_percent"].is_null());
}

TEST(Compare, SavingsAreRelativeToTheBaseline) {
  ScenarioResult base;
  base.label = kBaselineLabel;
  base.status = "ok";
  base.schedule = Schedule(1, 4);
  base.cost = 10.0;
  ScenarioResult milp = base;
  milp.label = kNoSolarLabel;
  milp.status = "optimal";
  milp.cost = 4.5;
  EXPECT_NE(comparison_table({base, milp}).find("55.00%"), std::string::npos);
  EXPECT_DOUBLE_EQ(
      comparison_json({base, milp})["cases"][1]["savings_percent"].get<double>(),
      55.0);
}

TEST(Summary, CarriesTheSolveStatistics) {
  InstanceGenConfig cfg;
  const FleetInstance inst = gen_instance(cfg, 1).instance;
  const ScenarioResult r = run_milp(kNoSolarLabel, inst, SolveConfig{});
  const nlohmann::json doc = summary_json(r);
  for (const char* key :
       {"label", "status", "cost", "bound", "gap", "nodes", "seconds"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(doc["status"], "optimal");
  EXPECT_FALSE(doc.contains("violations"));
}

TEST(Artifacts, WrittenAtomicallyAndReloadable) {
  const FleetInstance inst = desk_scale_instance(0, 12);
  const ScenarioResult base = run_baseline(without_solar(inst));
  ASSERT_TRUE(base.has_plan());
  const fs::path dir = scratch_dir("artifacts");
  write_scenario(dir, "baseline_", without_solar(inst), base);
  for (const char* name : {"baseline_schedule.csv", "baseline_series.csv",
                           "baseline_summary.json"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_NE(entry.path().extension(), ".tmp");
  }
  std::istringstream sched_is(slurp(dir / "baseline_schedule.csv"));
  std::istringstream series_is(slurp(dir / "baseline_series.csv"));
  Schedule back = read_schedule_csv(sched_is, inst);
  read_series_csv(series_is, inst, back);
  EXPECT_EQ(back.activity, base.schedule->activity);
  EXPECT_TRUE(validate(without_solar(inst), back).ok());
  const auto summary =
      nlohmann::json::parse(slurp(dir / "baseline_summary.json"));
  EXPECT_NEAR(summary["cost"].get<double>(), base.cost, 1e-12);
  fs::remove_all(dir);
}

TEST(Artifacts, SameInputSameBytes) {
  InstanceGenConfig cfg;
  cfg.solar = SolarProfile::kBell;
  const FleetInstance inst = gen_instance(cfg, 12).instance;
  const fs::path a = scratch_dir("bytes_a");
  const fs::path b = scratch_dir("bytes_b");
  write_scenario(a, "", inst, run_milp(kWithSolarLabel, inst, SolveConfig{}));
  write_scenario(b, "", inst, run_milp(kWithSolarLabel, inst, SolveConfig{}));
  EXPECT_EQ(slurp(a / "schedule.csv"), slurp(b / "schedule.csv"));
  EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
  auto summary_a = nlohmann::json::parse(slurp(a / "summary.json"));
  auto summary_b = nlohmann::json::parse(slurp(b / "summary.json"));
  summary_a.erase("seconds");
  summary_b.erase("seconds");
  EXPECT_EQ(summary_a, summary_b);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(SolarHours, CountsOnlyDaylightCharging) {
  FleetInstance inst = testing::small_instance(360);  // T = 4
  inst.buses.push_back(testing::make_bus("B1", 0, 0, 480));
  inst.solar = make_solar({0, 5, 5, 0}, inst.grid);
  Schedule sched(1, 4);
  sched.at(0, 0).charging = true;
  sched.at(0, 0).chargers = {0};
  sched.at(0, 2).charging = true;
  sched.at(0, 2).chargers = {0};
  EXPECT_DOUBLE_EQ(charge_in_solar_hours(inst, sched), 240.0);
}

}  // namespace
}  // namespace ebus
