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

#include "ebus/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ebus {
namespace {

using nlohmann::json;

const json& require(const json& obj, std::string_view key,
                    const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(std::string(key));
  if (it == obj.end()) {
    throw ParseError(path + "." + std::string(key) + ": missing required key");
  }
  return *it;
}

double number_at(const json& obj, std::string_view key,
                 const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) {
    throw ParseError(path + "." + std::string(key) + ": expected a number");
  }
  return v.get<double>();
}

std::string string_at(const json& obj, std::string_view key,
                      const std::string& path) {
  const json& v = require(obj, key, path);
  if (v.is_string()) return v.get<std::string>();
  // Identifiers are occasionally written as bare integers.
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(path + "." + std::string(key) + ": expected a string");
}

const json& array_at(const json& obj, std::string_view key,
                     const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) {
    throw ParseError(path + "." + std::string(key) + ": expected an array");
  }
  return v;
}

std::string indexed(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

// Minutes after day start; `is_end` maps the day-start instant to 1440.
int relative_minutes(int clock, int day_start, bool is_end) {
  int rel = ((clock - day_start) % kMinutesPerDay + kMinutesPerDay) %
            kMinutesPerDay;
  if (is_end && rel == 0) rel = kMinutesPerDay;
  return rel;
}

}  // namespace

TimeGrid make_time_grid(int step_minutes, int day_start_minutes) {
  if (step_minutes <= 0 || kMinutesPerDay % step_minutes != 0) {
    throw RangeError("step_minutes must be a positive divisor of 1440, got " +
                     std::to_string(step_minutes));
  }
  if (day_start_minutes < 0 || day_start_minutes >= kMinutesPerDay) {
    throw RangeError("day start must lie in [00:00, 24:00)");
  }
  return TimeGrid{day_start_minutes, step_minutes};
}

int parse_clock(std::string_view text, std::string_view field) {
  auto fail = [&]() -> int {
    throw ParseError(std::string(field) + ": expected \"HH:MM\", got \"" +
                     std::string(text) + "\"");
  };
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon > 2 ||
      text.size() != colon + 3) {
    return fail();
  }
  int hours = 0;
  int minutes = 0;
  for (std::size_t i = 0; i < colon; ++i) {
    if (text[i] < '0' || text[i] > '9') return fail();
    hours = hours * 10 + (text[i] - '0');
  }
  for (std::size_t i = colon + 1; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return fail();
    minutes = minutes * 10 + (text[i] - '0');
  }
  if (minutes >= 60 || hours > 24 || (hours == 24 && minutes != 0)) {
    return fail();
  }
  return hours * 60 + minutes;
}

std::string format_clock(int minutes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

Trip make_trip(std::string id, std::string route, int start_minutes,
               int end_minutes, double miles, double efficiency_kwh_per_mile,
               const TimeGrid& grid) {
  const int start_rel =
      relative_minutes(start_minutes, grid.day_start_minutes, false);
  const int end_rel =
      relative_minutes(end_minutes, grid.day_start_minutes, true);
  if (start_minutes == kMinutesPerDay) {
    throw RangeError("trip " + id + " starts at the end of the day");
  }
  if (end_rel < start_rel) {
    throw RangeError("trip " + id + " (" + format_clock(start_minutes) + "-" +
                     format_clock(end_minutes) +
                     ") crosses the day boundary");
  }
  if (end_rel == start_rel) {
    throw RangeError("trip " + id + " has zero duration");
  }
  if (miles < 0) throw RangeError("trip " + id + " has negative miles");

  Trip trip;
  trip.id = std::move(id);
  trip.route = std::move(route);
  trip.start_step = start_rel / grid.step_minutes;
  trip.end_step = (end_rel + grid.step_minutes - 1) / grid.step_minutes - 1;
  trip.miles = miles;
  trip.energy_per_step =
      miles * efficiency_kwh_per_mile / static_cast<double>(trip.num_steps());
  return trip;
}

Charger make_charger(std::string id, double power_kw, const TimeGrid& grid) {
  return Charger{std::move(id), power_kw, power_kw * grid.step_hours()};
}

SolarForecast make_solar(std::vector<double> kw, const TimeGrid& grid) {
  SolarForecast solar;
  solar.energy_per_step.reserve(kw.size());
  for (double p : kw) solar.energy_per_step.push_back(p * grid.step_hours());
  solar.kw = std::move(kw);
  return solar;
}

SolarForecast no_solar(const TimeGrid& grid) {
  return make_solar(std::vector<double>(grid.num_steps(), 0.0), grid);
}

void check_rates(const RateSchedule& rates) {
  if (rates.intervals.empty()) throw RateError("rate schedule is empty");
  int expected_start = 0;
  for (std::size_t i = 0; i < rates.intervals.size(); ++i) {
    const RateInterval& r = rates.intervals[i];
    if (r.start_minutes != expected_start) {
      throw RateError(indexed("rates", i) + ": starts at " +
                      format_clock(r.start_minutes) + ", expected " +
                      format_clock(expected_start) +
                      (r.start_minutes < expected_start ? " (overlap)"
                                                        : " (gap)"));
    }
    if (r.end_minutes <= r.start_minutes) {
      throw RateError(indexed("rates", i) + ": empty or reversed interval");
    }
    if (!(r.price_per_kwh >= 0)) {
      throw RateError(indexed("rates", i) + ": negative price");
    }
    expected_start = r.end_minutes;
  }
  if (expected_start != kMinutesPerDay) {
    throw RateError("rates end at " + format_clock(expected_start) +
                    ", expected 24:00 (gap)");
  }
}

double price_at(const RateSchedule& rates, int t, const TimeGrid& grid) {
  const int clock = grid.wall_clock(t);
  for (const RateInterval& r : rates.intervals) {
    if (r.start_minutes <= clock && clock < r.end_minutes) {
      return r.price_per_kwh;
    }
  }
  throw RateError("no rate interval covers " + format_clock(clock));
}

std::vector<double> price_vector(const FleetInstance& inst) {
  std::vector<double> prices(inst.num_steps());
  for (int t = 0; t < inst.num_steps(); ++t) {
    prices[t] = price_at(inst.rates, t, inst.grid);
  }
  return prices;
}

RateSchedule parse_rates(const json& doc) {
  RateSchedule rates;
  const json& arr = array_at(doc, "rates", "instance");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = indexed("rates", i);
    RateInterval r;
    r.start_minutes = parse_clock(string_at(arr[i], "start", path),
                                  path + ".start");
    r.end_minutes = parse_clock(string_at(arr[i], "end", path), path + ".end");
    r.price_per_kwh = number_at(arr[i], "price_per_kwh", path);
    rates.intervals.push_back(r);
  }
  check_rates(rates);
  return rates;
}

FleetInstance parse_instance(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance: expected a JSON object");
  FleetInstance inst;

  const json& step = require(doc, "step_minutes", "instance");
  if (!step.is_number_integer()) {
    throw ParseError("instance.step_minutes: expected an integer");
  }
  int day_start = 0;
  if (doc.contains("day_start")) {
    day_start = parse_clock(string_at(doc, "day_start", "instance"),
                            "instance.day_start");
  }
  inst.grid = make_time_grid(step.get<int>(), day_start % kMinutesPerDay);
  if (doc.contains("efficiency_kwh_per_mile")) {
    inst.efficiency_kwh_per_mile =
        number_at(doc, "efficiency_kwh_per_mile", "instance");
  }

  const json& trips = array_at(doc, "trips", "instance");
  for (std::size_t i = 0; i < trips.size(); ++i) {
    const std::string path = indexed("trips", i);
    const json& t = trips[i];
    inst.trips.push_back(make_trip(
        string_at(t, "id", path), string_at(t, "route", path),
        parse_clock(string_at(t, "start", path), path + ".start"),
        parse_clock(string_at(t, "end", path), path + ".end"),
        number_at(t, "miles", path), inst.efficiency_kwh_per_mile,
        inst.grid));
  }

  const json& buses = array_at(doc, "buses", "instance");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string path = indexed("buses", i);
    const json& b = buses[i];
    inst.buses.push_back(Bus{string_at(b, "id", path),
                             string_at(b, "model", path),
                             number_at(b, "e_min_kwh", path),
                             number_at(b, "e_max_kwh", path),
                             number_at(b, "e_init_kwh", path)});
  }

  const json& chargers = array_at(doc, "chargers", "instance");
  for (std::size_t i = 0; i < chargers.size(); ++i) {
    const std::string path = indexed("chargers", i);
    inst.chargers.push_back(make_charger(string_at(chargers[i], "id", path),
                                         number_at(chargers[i], "power_kw",
                                                   path),
                                         inst.grid));
  }

  inst.rates = parse_rates(doc);

  if (doc.contains("solar_kw")) {
    const json& arr = array_at(doc, "solar_kw", "instance");
    if (static_cast<int>(arr.size()) != inst.num_steps()) {
      throw ParseError("instance.solar_kw: expected " +
                       std::to_string(inst.num_steps()) + " values, got " +
                       std::to_string(arr.size()));
    }
    std::vector<double> kw;
    kw.reserve(arr.size());
    for (std::size_t t = 0; t < arr.size(); ++t) {
      if (!arr[t].is_number()) {
        throw ParseError(indexed("instance.solar_kw", t) +
                         ": expected a number");
      }
      kw.push_back(arr[t].get<double>());
    }
    inst.solar = make_solar(std::move(kw), inst.grid);
  } else {
    inst.solar = no_solar(inst.grid);
  }
  return inst;
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

FleetInstance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_json(path));
}

RateSchedule load_rates(const std::filesystem::path& path) {
  return parse_rates(read_json(path));
}

SolarForecast load_solar(const std::filesystem::path& path,
                         const TimeGrid& grid) {
  const json doc = read_json(path);
  const json& arr = array_at(doc, "solar_kw", "solar");
  if (static_cast<int>(arr.size()) != grid.num_steps()) {
    throw ParseError("solar.solar_kw: expected " +
                     std::to_string(grid.num_steps()) + " values, got " +
                     std::to_string(arr.size()));
  }
  return make_solar(arr.get<std::vector<double>>(), grid);
}

json to_json(const FleetInstance& inst) {
  json doc;
  doc["step_minutes"] = inst.grid.step_minutes;
  if (inst.grid.day_start_minutes != 0) {
    doc["day_start"] = format_clock(inst.grid.day_start_minutes);
  }
  doc["efficiency_kwh_per_mile"] = inst.efficiency_kwh_per_mile;

  json trips = json::array();
  for (const Trip& t : inst.trips) {
    const int start = inst.grid.day_start_minutes +
                      t.start_step * inst.grid.step_minutes;
    int end = inst.grid.day_start_minutes +
              (t.end_step + 1) * inst.grid.step_minutes;
    if (end > kMinutesPerDay) end -= kMinutesPerDay;
    trips.push_back({{"id", t.id},
                     {"route", t.route},
                     {"start", format_clock(start % kMinutesPerDay)},
                     {"end", format_clock(end)},
                     {"miles", t.miles}});
  }
  doc["trips"] = std::move(trips);

  json buses = json::array();
  for (const Bus& b : inst.buses) {
    buses.push_back({{"id", b.id},
                     {"model", b.model},
                     {"e_min_kwh", b.e_min},
                     {"e_max_kwh", b.e_max},
                     {"e_init_kwh", b.e_init}});
  }
  doc["buses"] = std::move(buses);

  json chargers = json::array();
  for (const Charger& c : inst.chargers) {
    chargers.push_back({{"id", c.id}, {"power_kw", c.power_kw}});
  }
  doc["chargers"] = std::move(chargers);

  json rates = json::array();
  for (const RateInterval& r : inst.rates.intervals) {
    rates.push_back({{"start", format_clock(r.start_minutes)},
                     {"end", format_clock(r.end_minutes)},
                     {"price_per_kwh", r.price_per_kwh}});
  }
  doc["rates"] = std::move(rates);
  doc["solar_kw"] = inst.solar.kw;
  return doc;
}

void save_instance(const FleetInstance& inst,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write file");
  out << to_json(inst).dump(1) << '\n';
}

FleetInstance without_solar(FleetInstance inst) {
  inst.solar = no_solar(inst.grid);
  return inst;
}

std::vector<std::string> coverage_defects(const FleetInstance& inst) {
  std::vector<std::string> defects;
  const int T = inst.num_steps();
  if (inst.grid.step_minutes <= 0 ||
      kMinutesPerDay % inst.grid.step_minutes != 0) {
    return defects;
  }
  // Pigeonhole: every active trip needs its own bus.
  std::vector<int> active(T + 1, 0);
  for (const Trip& t : inst.trips) {
    if (t.start_step < 0 || t.end_step >= T || t.start_step > t.end_step) {
      continue;
    }
    active[t.start_step] += 1;
    active[t.end_step + 1] -= 1;
  }
  int running = 0;
  const int buses = static_cast<int>(inst.buses.size());
  for (int t = 0; t < T; ++t) {
    running += active[t];
    if (running > buses) {
      defects.push_back("coverage impossible at step " + std::to_string(t) +
                        ": " + std::to_string(running) +
                        " trips active with " + std::to_string(buses) +
                        " buses");
    }
  }
  return defects;
}

std::vector<std::string> validate_instance(const FleetInstance& inst) {
  std::vector<std::string> defects;
  const int T = inst.num_steps();
  if (inst.grid.step_minutes <= 0 ||
      kMinutesPerDay % inst.grid.step_minutes != 0) {
    defects.push_back("step_minutes does not divide 1440");
    return defects;
  }

  std::set<std::string> ids;
  for (const Trip& t : inst.trips) {
    if (!ids.insert(t.id).second) defects.push_back("duplicate trip id " + t.id);
    if (t.start_step < 0 || t.start_step > t.end_step || t.end_step >= T) {
      defects.push_back("trip " + t.id + " window [" +
                        std::to_string(t.start_step) + ", " +
                        std::to_string(t.end_step) + "] outside the grid");
    }
    if (!(t.energy_per_step >= 0)) {
      defects.push_back("trip " + t.id + " has negative energy per step");
    }
  }
  ids.clear();
  for (const Bus& b : inst.buses) {
    if (!ids.insert(b.id).second) defects.push_back("duplicate bus id " + b.id);
    if (!(0 <= b.e_min && b.e_min <= b.e_init && b.e_init <= b.e_max)) {
      std::ostringstream os;
      os << "bus " << b.id << " violates 0 <= e_min <= e_init <= e_max ("
         << b.e_min << ", " << b.e_init << ", " << b.e_max << ")";
      defects.push_back(os.str());
    }
  }
  ids.clear();
  for (const Charger& c : inst.chargers) {
    if (!ids.insert(c.id).second) {
      defects.push_back("duplicate charger id " + c.id);
    }
    if (!(c.power_kw > 0)) {
      defects.push_back("charger " + c.id + " has non-positive power");
    }
  }
  try {
    check_rates(inst.rates);
  } catch (const RateError& e) {
    defects.push_back(e.what());
  }
  if (static_cast<int>(inst.solar.energy_per_step.size()) != T) {
    defects.push_back("solar forecast has " +
                      std::to_string(inst.solar.energy_per_step.size()) +
                      " steps, expected " + std::to_string(T));
  } else {
    for (int t = 0; t < T; ++t) {
      if (!(inst.solar.energy_per_step[t] >= 0)) {
        defects.push_back("negative solar forecast at step " +
                          std::to_string(t));
        break;
      }
    }
  }

  const std::vector<std::string> coverage = coverage_defects(inst);
  defects.insert(defects.end(), coverage.begin(), coverage.end());
  return defects;
}

std::vector<std::string> charge_increment_warnings(const FleetInstance& inst) {
  std::vector<std::string> warnings;
  if (inst.chargers.empty()) {
    if (!inst.trips.empty()) {
      warnings.push_back("no chargers: buses cannot restore consumed energy");
    }
    return warnings;
  }
  double increment = inst.chargers.front().energy_per_step;
  for (const Charger& c : inst.chargers) {
    increment = std::min(increment, c.energy_per_step);
  }
  auto is_multiple = [increment](double value) {
    const double ratio = value / increment;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
  };
  for (const Charger& c : inst.chargers) {
    if (!is_multiple(c.energy_per_step)) return warnings;  // mixed increments
  }
  int off = 0;
  for (const Trip& t : inst.trips) {
    if (!is_multiple(t.energy())) ++off;
  }
  if (off > 0) {
    std::ostringstream os;
    os << off << " of " << inst.trips.size()
       << " trips consume energy that is not a whole multiple of the "
       << increment
       << " kWh charging increment; a bus returns to its initial energy only "
          "if its total consumption is such a multiple, so the day may be "
          "infeasible";
    warnings.push_back(os.str());
  }
  return warnings;
}

}  // namespace ebus
