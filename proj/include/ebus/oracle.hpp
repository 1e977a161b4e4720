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

// Instance generators and the schedule mutation engine used by the test
// suites, plus the synthetic Marguerite data the fixtures are built from.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ebus/fleet.hpp"
#include "ebus/schedule.hpp"
#include "json.hpp"

namespace ebus {

// Uniform integer in [lo, hi] from raw 64-bit draws, so sequences do not
// depend on the standard library's distribution implementation.
int draw_int(std::mt19937_64& rng, int lo, int hi);
double draw_unit(std::mt19937_64& rng);

enum class PriceProfile { kFlat, kTwoTier, kTableI };
enum class SolarProfile { kNone, kBell };

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct InstanceGenConfig {
  IntRange buses{1, 2};
  IntRange trips{0, 4};
  IntRange steps{8, 16};  // only values dividing 1440 are drawn
  IntRange chargers{1, 2};
  double overlap_probability = 0.3;
  PriceProfile prices = PriceProfile::kTableI;
  SolarProfile solar = SolarProfile::kNone;
  double solar_peak_kw = 40.0;
  double charger_kw = 40.0;
  int max_attempts = 200;
};

struct GeneratedInstance {
  FleetInstance instance;
  int attempts = 0;  // draws taken, including rejected ones
};

// Deterministic per (cfg, seed). Energies are whole multiples of the
// charging increment so that ending the day at the initial level is
// reachable. Throws std::runtime_error once max_attempts draws have all
// failed validate_instance.
GeneratedInstance gen_instance(const InstanceGenConfig& cfg,
                               std::uint64_t seed);

RateSchedule table_i_rates();
RateSchedule flat_rates(double price_per_kwh);
// $0.10 before noon, $0.20 after.
RateSchedule two_tier_rates();

// Zero before 07:00 and after 19:00, linear up to `peak_kw` at 12:00;
// sampled at step midpoints.
SolarForecast bell_solar(const TimeGrid& grid, double peak_kw);

struct RouteInfo {
  std::string name;
  int daily_trips = 0;
  double miles = 0.0;
  int window_start = 0;  // minutes since midnight
  int window_end = 0;
  int first_number = 1;  // trip ids continue across a split route

  friend bool operator==(const RouteInfo&, const RouteInfo&) = default;
};

// The fifteen Marguerite routes with the service windows we assign them;
// AM/PM routes appear twice, once per window.
const std::vector<RouteInfo>& marguerite_routes();

// Routes fixture: {"routes": [{"name", "daily_trips", "miles", "start",
// "end", "first_number"}]} with "HH:MM" service windows. The reader throws
// ParseError naming the offending field.
nlohmann::json routes_to_json(const std::vector<RouteInfo>& routes);
std::vector<RouteInfo> parse_routes(const nlohmann::json& doc);
std::vector<RouteInfo> load_routes(const std::filesystem::path& path);

// Trips of one route spread evenly over its service window; duration is
// miles at 12 mph, at least 10 minutes.
std::vector<Trip> route_trips(const RouteInfo& route, double efficiency,
                              const TimeGrid& grid);

// Full synthetic fleet day: 352 trips, 38 buses, 46 ports, Table I.
FleetInstance marguerite_instance();

// Six buses, twelve 40 kW ports, ~60 trips drawn from the routes with
// whole-mile lengths, Table I rates and 1 MW of bell-shaped solar.
FleetInstance desk_scale_instance(std::uint64_t seed = 0, int trips = 60);

// A copy of `sched` breaking constraint family `family`, or nullopt when
// this schedule offers nothing to break that way (no charging step to
// tamper with, a single bus, ...). Other families may break along with
// the named one.
std::optional<Schedule> mutate(const FleetInstance& inst, const Schedule& sched,
                               Family family, std::uint64_t seed = 0);

}  // namespace ebus
