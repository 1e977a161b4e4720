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

// Scenario runs behind the command-line tool: the charge-on-return
// baseline, the MILP without solar and the MILP with solar, plus the
// artifacts each run leaves on disk.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ebus/branch_and_bound.hpp"
#include "ebus/fleet.hpp"
#include "ebus/schedule.hpp"
#include "json.hpp"

namespace ebus {

inline constexpr const char* kBaselineLabel = "baseline";
inline constexpr const char* kNoSolarLabel = "no-solar";
inline constexpr const char* kWithSolarLabel = "with-solar";

struct ScenarioResult {
  std::string label;
  // MipStatus label for MILP runs; "ok" or "n/a" for the baseline.
  std::string status;
  MipStatus mip_status = MipStatus::kNumericalFailure;
  std::optional<Schedule> schedule;  // empty without a plan
  double cost = 0.0;                 // $, cost_of(schedule)
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  double seconds = 0.0;
  std::string note;  // why no plan was produced
  ValidationReport validation;

  bool has_plan() const { return schedule.has_value(); }
};

// Greedy status-quo plan, costed on `inst` as given.
ScenarioResult run_baseline(const FleetInstance& inst);

// Solves the MILP on `inst` and decodes the incumbent. `seed` (a schedule
// valid for `inst`) becomes the starting incumbent when it checks out.
ScenarioResult run_milp(const std::string& label, const FleetInstance& inst,
                        SolveConfig config,
                        const std::optional<Schedule>& seed = std::nullopt);

// Baseline and no-solar on g = 0, then with-solar on the instance's own
// forecast. Each plan seeds the next run, so when all three produce
// plans their costs are ordered even under a nonzero gap.
std::vector<ScenarioResult> run_compare(const FleetInstance& inst,
                                        const SolveConfig& config);

// kWh delivered by chargers during steps with g(t) > 0 in `solar_inst`.
double charge_in_solar_hours(const FleetInstance& solar_inst,
                             const Schedule& sched);

// {label, status, cost, bound, gap, nodes, seconds}, plus the violated
// families when the decoded plan failed validation.
nlohmann::json summary_json(const ScenarioResult& result);

// Case / status / cost / savings table; savings are relative to the
// baseline cost and read n/a when the baseline has no plan.
std::string comparison_table(const std::vector<ScenarioResult>& results);
nlohmann::json comparison_json(const std::vector<ScenarioResult>& results);

// Writes `contents` to a sibling temporary file, then renames it over
// `path`, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

// <prefix>schedule.csv, <prefix>series.csv and <prefix>summary.json in
// `dir`; the CSVs only when the result carries a plan.
void write_scenario(const std::filesystem::path& dir, const std::string& prefix,
                    const FleetInstance& inst, const ScenarioResult& result);

}  // namespace ebus
