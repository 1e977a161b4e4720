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

// Domain model of a single-depot electric bus fleet over one day: the time
// grid, trips, buses, chargers, time-of-use rates and the solar forecast,
// plus ingestion from the instance JSON format.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ebus {

inline constexpr int kMinutesPerDay = 1440;

// Base class for every instance ingestion failure.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document: missing key, wrong type, bad "HH:MM" literal.
class ParseError : public InstanceError {
 public:
  using InstanceError::InstanceError;
};

// A trip or grid parameter that does not fit in the 24-hour day.
class RangeError : public InstanceError {
 public:
  using InstanceError::InstanceError;
};

// Rate intervals that overlap, leave gaps, or carry negative prices.
class RateError : public InstanceError {
 public:
  using InstanceError::InstanceError;
};

// Uniform discretization of one day. Step t covers the wall-clock interval
// [day_start + t * step_minutes, day_start + (t + 1) * step_minutes).
struct TimeGrid {
  int day_start_minutes = 0;
  int step_minutes = 5;

  int num_steps() const { return kMinutesPerDay / step_minutes; }
  double step_hours() const { return step_minutes / 60.0; }
  // Minutes since midnight at which step `t` starts.
  int wall_clock(int t) const {
    return (day_start_minutes + t * step_minutes) % kMinutesPerDay;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

// Throws RangeError unless step_minutes divides 1440.
TimeGrid make_time_grid(int step_minutes, int day_start_minutes = 0);

struct Trip {
  std::string id;
  std::string route;
  int start_step = 0;  // first step served, inclusive
  int end_step = 0;    // last step served, inclusive
  double energy_per_step = 0.0;  // kWh drawn in each served step
  double miles = 0.0;

  int num_steps() const { return end_step - start_step + 1; }
  double energy() const { return energy_per_step * num_steps(); }
  bool covers(int t) const { return start_step <= t && t <= end_step; }

  friend bool operator==(const Trip&, const Trip&) = default;
};

struct Bus {
  std::string id;
  std::string model;
  double e_min = 0.0;   // kWh
  double e_max = 0.0;   // kWh
  double e_init = 0.0;  // kWh, also the required end-of-day level

  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Charger {
  std::string id;
  double power_kw = 0.0;
  double energy_per_step = 0.0;  // power_kw * step_hours

  friend bool operator==(const Charger&, const Charger&) = default;
};

// Half-open wall-clock interval [start, end) in minutes since midnight.
struct RateInterval {
  int start_minutes = 0;
  int end_minutes = 0;
  double price_per_kwh = 0.0;

  friend bool operator==(const RateInterval&, const RateInterval&) = default;
};

struct RateSchedule {
  std::vector<RateInterval> intervals;

  friend bool operator==(const RateSchedule&, const RateSchedule&) = default;
};

// Available on-site generation. `kw` is the source of truth; the per-step
// energy is derived from it on construction.
struct SolarForecast {
  std::vector<double> kw;
  std::vector<double> energy_per_step;  // g(t), kWh

  friend bool operator==(const SolarForecast&, const SolarForecast&) = default;
};

struct FleetInstance {
  TimeGrid grid;
  double efficiency_kwh_per_mile = 1.25;
  std::vector<Trip> trips;
  std::vector<Bus> buses;
  std::vector<Charger> chargers;
  RateSchedule rates;
  SolarForecast solar;

  int num_steps() const { return grid.num_steps(); }

  friend bool operator==(const FleetInstance&, const FleetInstance&) = default;
};

// "HH:MM" with 00:00 <= value <= 24:00. `field` names the offending key in
// the ParseError message.
int parse_clock(std::string_view text, std::string_view field);
std::string format_clock(int minutes);

// Converts a wall-clock trip to grid steps: start floored, end ceiled, and
// `miles * efficiency` spread uniformly over the covered steps. Throws
// RangeError for empty trips and trips that cross the day boundary.
Trip make_trip(std::string id, std::string route, int start_minutes,
               int end_minutes, double miles, double efficiency_kwh_per_mile,
               const TimeGrid& grid);

Charger make_charger(std::string id, double power_kw, const TimeGrid& grid);

SolarForecast make_solar(std::vector<double> kw, const TimeGrid& grid);
SolarForecast no_solar(const TimeGrid& grid);

// Throws RateError unless the intervals partition [00:00, 24:00) in order
// with non-negative prices.
void check_rates(const RateSchedule& rates);

// Price of the interval containing the start instant of step `t`.
double price_at(const RateSchedule& rates, int t, const TimeGrid& grid);
std::vector<double> price_vector(const FleetInstance& inst);

FleetInstance parse_instance(const nlohmann::json& doc);
FleetInstance load_instance(const std::filesystem::path& path);
nlohmann::json to_json(const FleetInstance& inst);
void save_instance(const FleetInstance& inst, const std::filesystem::path& path);

// Fixture fragments: {"rates": [...]} and {"solar_kw": [...]}.
RateSchedule parse_rates(const nlohmann::json& doc);
RateSchedule load_rates(const std::filesystem::path& path);
SolarForecast load_solar(const std::filesystem::path& path,
                         const TimeGrid& grid);

// Copy of `inst` with g(t) = 0 everywhere.
FleetInstance without_solar(FleetInstance inst);

// Human-readable defects; empty iff every type invariant holds and at no
// step are more trips active than there are buses.
std::vector<std::string> validate_instance(const FleetInstance& inst);
// The pigeonhole part of validate_instance alone: steps at which more
// trips are active than there are buses. Such an instance is well formed
// but has no feasible plan.
std::vector<std::string> coverage_defects(const FleetInstance& inst);

// Warnings about data that cannot satisfy the end-of-day energy equality:
// each bus charges in whole per-step increments, so it can only return to
// its initial level if its consumption is a multiple of those increments.
std::vector<std::string> charge_increment_warnings(const FleetInstance& inst);

}  // namespace ebus
