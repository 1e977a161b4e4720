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

#include "ebus/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ebus {
namespace {

using nlohmann::json;

json number_or_null(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

// Savings of `cost` against `base` in percent; nullopt when undefined.
std::optional<double> savings_percent(double base, double cost) {
  if (base <= 0.0) return std::nullopt;
  return 100.0 * (base - cost) / base;
}

const ScenarioResult* find(const std::vector<ScenarioResult>& results,
                           const std::string& label) {
  for (const ScenarioResult& r : results) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

}  // namespace

ScenarioResult run_baseline(const FleetInstance& inst) {
  ScenarioResult result;
  result.label = kBaselineLabel;
  std::string why;
  result.schedule = baseline_charge_on_return(inst, &why);
  if (!result.schedule) {
    result.status = "n/a";
    result.note = why;
    return result;
  }
  result.status = "ok";
  result.validation = validate(inst, *result.schedule);
  result.cost = cost_of(inst, *result.schedule);
  result.bound = result.cost;
  return result;
}

ScenarioResult run_milp(const std::string& label, const FleetInstance& inst,
                        SolveConfig config,
                        const std::optional<Schedule>& seed) {
  const MilpProblem prob = assemble(inst);
  if (seed) {
    Schedule settled = *seed;
    settle_power(inst, settled);
    config.initial_solution = encode(inst, prob.index, settled);
  }
  const MipResult mip = branch_and_bound(prob, config);

  ScenarioResult result;
  result.label = label;
  result.mip_status = mip.status;
  result.status = std::string(to_string(mip.status));
  result.bound = mip.bound;
  result.gap = mip.gap;
  result.nodes = mip.nodes;
  result.seconds = mip.seconds;
  if (mip.values.size() == 0) {
    result.note = "no incumbent";
    return result;
  }
  result.schedule = decode(inst, prob.index, mip.values);
  result.validation = validate(inst, *result.schedule);
  result.cost = cost_of(inst, *result.schedule);
  return result;
}

std::vector<ScenarioResult> run_compare(const FleetInstance& inst,
                                        const SolveConfig& config) {
  const FleetInstance dark = without_solar(inst);
  auto usable = [](const ScenarioResult& r) {
    return r.has_plan() && r.validation.ok();
  };
  ScenarioResult base = run_baseline(dark);
  ScenarioResult no_solar = run_milp(
      kNoSolarLabel, dark, config,
      usable(base) ? base.schedule : std::nullopt);
  std::optional<Schedule> seed;
  if (usable(no_solar)) {
    seed = no_solar.schedule;
  } else if (usable(base)) {
    seed = base.schedule;
  }
  ScenarioResult with_solar = run_milp(kWithSolarLabel, inst, config, seed);
  std::vector<ScenarioResult> results;
  results.push_back(std::move(base));
  results.push_back(std::move(no_solar));
  results.push_back(std::move(with_solar));
  return results;
}

double charge_in_solar_hours(const FleetInstance& solar_inst,
                             const Schedule& sched) {
  double total = 0.0;
  for (int t = 0; t < sched.steps; ++t) {
    if (solar_inst.solar.energy_per_step[t] > 0.0) {
      total += sched.load(solar_inst, t);
    }
  }
  return total;
}

json summary_json(const ScenarioResult& result) {
  json doc;
  doc["label"] = result.label;
  doc["status"] = result.status;
  doc["cost"] = result.has_plan() ? json(result.cost) : json(nullptr);
  doc["bound"] = number_or_null(result.bound);
  doc["gap"] = result.has_plan() ? number_or_null(result.gap) : json(nullptr);
  doc["nodes"] = result.nodes;
  doc["seconds"] = result.seconds;
  if (!result.note.empty()) doc["note"] = result.note;
  if (result.has_plan() && !result.validation.ok()) {
    json families = json::array();
    for (Family f : result.validation.families()) {
      families.push_back(std::string(to_string(f)));
    }
    doc["violations"] = std::move(families);
  }
  return doc;
}

std::string comparison_table(const std::vector<ScenarioResult>& results) {
  const ScenarioResult* base = find(results, kBaselineLabel);
  std::ostringstream os;
  os << std::left << std::setw(12) << "case" << std::setw(14) << "status"
     << std::right << std::setw(14) << "cost_usd" << std::setw(12)
     << "savings" << '\n';
  for (const ScenarioResult& r : results) {
    os << std::left << std::setw(12) << r.label << std::setw(14) << r.status
       << std::right << std::setw(14);
    if (r.has_plan()) {
      os << std::fixed << std::setprecision(4) << r.cost;
    } else {
      os << "n/a";
    }
    os << std::setw(12);
    std::optional<double> pct;
    if (base != nullptr && base->has_plan() && r.has_plan()) {
      pct = savings_percent(base->cost, r.cost);
    }
    if (&r == base) {
      os << "-";
    } else if (pct) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << *pct << '%';
      os << cell.str();
    } else {
      os << "n/a";
    }
    os << '\n';
  }
  return os.str();
}

json comparison_json(const std::vector<ScenarioResult>& results) {
  const ScenarioResult* base = find(results, kBaselineLabel);
  json rows = json::array();
  for (const ScenarioResult& r : results) {
    json row = summary_json(r);
    std::optional<double> pct;
    if (base != nullptr && &r != base && base->has_plan() && r.has_plan()) {
      pct = savings_percent(base->cost, r.cost);
    }
    row["savings_percent"] = pct ? json(*pct) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return json{{"cases", std::move(rows)}};
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << contents;
    if (!os.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_scenario(const std::filesystem::path& dir, const std::string& prefix,
                    const FleetInstance& inst, const ScenarioResult& result) {
  std::filesystem::create_directories(dir);
  if (result.has_plan()) {
    std::ostringstream sched;
    write_schedule_csv(sched, inst, *result.schedule);
    write_file_atomic(dir / (prefix + "schedule.csv"), sched.str());
    std::ostringstream series;
    write_series_csv(series, inst, *result.schedule);
    write_file_atomic(dir / (prefix + "series.csv"), series.str());
  }
  write_file_atomic(dir / (prefix + "summary.json"),
                    summary_json(result).dump(2) + "\n");
}

}  // namespace ebus
