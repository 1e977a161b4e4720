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

// Decoded day plans: who drives what, who charges where, energy and power
// trajectories. A Schedule can represent infeasible plans (two trips on one
// bus, a charge without a charger) so that the validator has something to
// reject.

#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ebus/fleet.hpp"
#include "ebus/milp.hpp"

namespace ebus {

struct Activity {
  std::vector<int> trips;     // trip indices served during the step
  std::vector<int> chargers;  // charger indices occupied during the step
  bool charging = false;

  bool idle() const { return trips.empty() && chargers.empty() && !charging; }
  friend bool operator==(const Activity&, const Activity&) = default;
};

struct Schedule {
  int buses = 0;
  int steps = 0;
  std::vector<Activity> activity;  // bus-major, buses * steps
  Eigen::MatrixXd energy;          // buses x (steps + 1), kWh
  Eigen::VectorXd grid;            // V, kWh per step
  Eigen::VectorXd solar;           // S, kWh per step

  Schedule() = default;
  Schedule(int num_buses, int num_steps);

  Activity& at(int k, int t) { return activity[k * steps + t]; }
  const Activity& at(int k, int t) const { return activity[k * steps + t]; }
  // kWh delivered by chargers in step t.
  double load(const FleetInstance& inst, int t) const;
};

enum class Family {
  k1b,
  k1c,
  k1d,
  k1e,
  k1f,
  k1g,
  k1h,
  k1i,
  k1l,
  k1m,
  k1n,
  kGridNonneg,
  kFixXOutsideWindow,
};

inline constexpr Family kAllFamilies[] = {
    Family::k1b, Family::k1c, Family::k1d, Family::k1e,
    Family::k1f, Family::k1g, Family::k1h, Family::k1i,
    Family::k1l, Family::k1m, Family::k1n, Family::kGridNonneg,
    Family::kFixXOutsideWindow,
};

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view text);

struct Violation {
  Family family = Family::k1b;
  int bus = -1;
  int trip = -1;
  int charger = -1;
  int step = -1;
  double amount = 0.0;  // size of the breach, in the row's units
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Family family) const;
  std::vector<Family> families() const;  // distinct, in first-seen order
};

inline constexpr double kValidationTol = 1e-7;

// A solver point that does not describe a schedule (two activities on one
// bus in one step); indicates a solver defect.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Schedule decode(const FleetInstance& inst, const VariableIndex& idx,
                const Eigen::VectorXd& values);
// Column vector of the MILP for `sched`; the inverse of decode on valid
// schedules.
Eigen::VectorXd encode(const FleetInstance& inst, const VariableIndex& idx,
                       const Schedule& sched);

ValidationReport validate(const FleetInstance& inst, const Schedule& sched,
                          double tol = kValidationTol);

// Sum over steps of p(t) * V(t).
double cost_of(const FleetInstance& inst, const Schedule& sched);

// Sets S = min(load, g) and V = load - S from the charger occupancy.
void settle_power(const FleetInstance& inst, Schedule& sched);

// Greedy status-quo plan: trips go to the free bus holding the most
// energy, idle buses plug in whenever a charger is free, and the latest
// charging steps are trimmed until every bus ends where it started.
// Returns nullopt (with the reason in *why) when the greedy plan breaks
// an energy bound or cannot return a bus to its initial level.
std::optional<Schedule> baseline_charge_on_return(const FleetInstance& inst,
                                                  std::string* why = nullptr);

struct BruteForceLimits {
  int max_buses = 2;
  int max_trips = 4;
  int max_chargers = 2;
  int max_steps = 16;
};

struct BruteForceResult {
  bool feasible = false;
  double cost = 0.0;
  Schedule schedule;
  long assignments = 0;  // trip-to-bus assignments explored
  long states = 0;       // energy states expanded
};

// Exhaustive optimum for tiny instances. Throws std::invalid_argument when
// the instance exceeds `limits`.
BruteForceResult brute_force_optimum(const FleetInstance& inst,
                                     const BruteForceLimits& limits = {});

// bus_id,step,wall_clock,activity,detail_id,energy_kwh
// One row per trip or charger held in a step ("idle" when neither), plus a
// closing "end" row at step T carrying the final energy.
void write_schedule_csv(std::ostream& os, const FleetInstance& inst,
                        const Schedule& sched);
// step,wall_clock,total_charge_kw,grid_kw,solar_kw,price_per_kwh
void write_series_csv(std::ostream& os, const FleetInstance& inst,
                      const Schedule& sched);

// Readers throw ParseError naming the offending line. The schedule reader
// leaves grid and solar at zero; read_series_csv fills them in.
Schedule read_schedule_csv(std::istream& is, const FleetInstance& inst);
void read_series_csv(std::istream& is, const FleetInstance& inst,
                     Schedule& sched);

}  // namespace ebus
