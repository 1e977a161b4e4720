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

#include "ebus/fleet.hpp"
#include "ebus/oracle.hpp"
#include "test_util.hpp"

namespace ebus {
namespace {

using nlohmann::json;

json minimal_doc() {
  return json{
      {"step_minutes", 60},
      {"trips", json::array()},
      {"buses",
       {{{"id", "B1"},
         {"model", "K7"},
         {"e_min_kwh", 20.0},
         {"e_max_kwh", 180.0},
         {"e_init_kwh", 100.0}}}},
      {"chargers", {{{"id", "D1"}, {"power_kw", 40.0}}}},
      {"rates",
       {{{"start", "00:00"}, {"end", "24:00"}, {"price_per_kwh", 0.1}}}},
  };
}

TEST(TimeGrid, StepCountCoversTheDay) {
  const TimeGrid grid = make_time_grid(5);
  EXPECT_EQ(grid.num_steps(), 288);
  EXPECT_EQ(grid.wall_clock(12), 60);
  EXPECT_THROW(make_time_grid(7), RangeError);
  EXPECT_THROW(make_time_grid(0), RangeError);
}

TEST(Clock, ParsesAndFormats) {
  EXPECT_EQ(parse_clock("00:00", "f"), 0);
  EXPECT_EQ(parse_clock("13:05", "f"), 13 * 60 + 5);
  EXPECT_EQ(parse_clock("24:00", "f"), 1440);
  EXPECT_THROW(parse_clock("24:01", "f"), ParseError);
  EXPECT_THROW(parse_clock("7:5", "f"), ParseError);
  EXPECT_THROW(parse_clock("12:60", "f"), ParseError);
  EXPECT_EQ(format_clock(545), "09:05");
}

TEST(Trip, CLineSpreadsEnergyOverSevenSteps) {
  const TimeGrid grid = make_time_grid(5);
  const Trip trip = make_trip("C-1", "C Line", 7 * 60, 7 * 60 + 35, 7.00,
                              1.25, grid);
  EXPECT_EQ(trip.num_steps(), 7);
  EXPECT_NEAR(trip.energy_per_step, 1.25, 1e-12);
  EXPECT_NEAR(trip.energy(), 7.00 * 1.25, 1e-9);
}

TEST(Trip, StartFloorsAndEndCeils) {
  const TimeGrid grid = make_time_grid(15);
  const Trip trip = make_trip("t", "r", 7 * 60 + 7, 7 * 60 + 31, 3.0, 1.0,
                              grid);
  EXPECT_EQ(trip.start_step, 28);  // 07:00
  EXPECT_EQ(trip.end_step, 30);    // ends 07:45
  EXPECT_NEAR(trip.energy(), 3.0, 1e-12);
}

TEST(Trip, CrossingMidnightIsRejected) {
  const TimeGrid grid = make_time_grid(5);
  EXPECT_THROW(make_trip("t", "r", 23 * 60 + 50, 30, 1.0, 1.25, grid),
               RangeError);
}

TEST(Rates, TableIPricesAtRepresentativeSteps) {
  const RateSchedule rates = table_i_rates();
  const TimeGrid grid = make_time_grid(5);
  EXPECT_DOUBLE_EQ(price_at(rates, 0, grid), 0.08422);        // 00:00
  EXPECT_DOUBLE_EQ(price_at(rates, 10 * 12, grid), 0.11356);  // 10:00
  EXPECT_DOUBLE_EQ(price_at(rates, 13 * 12, grid), 0.16127);  // 13:00
  EXPECT_DOUBLE_EQ(price_at(rates, 19 * 12, grid), 0.11356);  // 19:00
  EXPECT_DOUBLE_EQ(price_at(rates, 23 * 12, grid), 0.08422);  // 23:00
  // Boundary instants belong to the interval they open.
  EXPECT_DOUBLE_EQ(price_at(rates, 12 * 12, grid), 0.16127);  // 12:00
  EXPECT_DOUBLE_EQ(price_at(rates, 102, grid), 0.11356);      // 08:30
}

TEST(Rates, GapsOverlapsAndNegativePricesAreRejected) {
  RateSchedule gap{{{0, 600, 0.1}, {660, 1440, 0.1}}};
  EXPECT_THROW(check_rates(gap), RateError);
  RateSchedule overlap{{{0, 700, 0.1}, {600, 1440, 0.1}}};
  EXPECT_THROW(check_rates(overlap), RateError);
  RateSchedule negative{{{0, 1440, -0.1}}};
  EXPECT_THROW(check_rates(negative), RateError);
  EXPECT_NO_THROW(check_rates(table_i_rates()));
}

TEST(Instance, ZeroTripsIsValid) {
  const FleetInstance inst = parse_instance(minimal_doc());
  EXPECT_TRUE(inst.trips.empty());
  EXPECT_TRUE(validate_instance(inst).empty());
  EXPECT_EQ(inst.solar.energy_per_step.size(), 24u);
  EXPECT_DOUBLE_EQ(inst.chargers[0].energy_per_step, 40.0);
}

TEST(Instance, MissingKeyNamesTheField) {
  json doc = minimal_doc();
  doc["buses"][0].erase("e_max_kwh");
  try {
    parse_instance(doc);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("e_max_kwh"), std::string::npos);
  }
}

TEST(Instance, SolarKwBecomesKwhPerStep) {
  json doc = minimal_doc();
  doc["step_minutes"] = 30;
  std::vector<double> kw(48, 0.0);
  kw[24] = 100.0;
  doc["solar_kw"] = kw;
  const FleetInstance inst = parse_instance(doc);
  EXPECT_DOUBLE_EQ(inst.solar.energy_per_step[24], 50.0);
  doc["solar_kw"] = std::vector<double>(47, 0.0);
  EXPECT_THROW(parse_instance(doc), ParseError);
}

TEST(Instance, PigeonholeIsADefect) {
  FleetInstance inst = testing::small_instance(60);
  inst.buses.push_back(testing::make_bus("B1", 0, 10, 20));
  inst.trips.push_back(make_trip("a", "r", 60, 120, 1, 1, inst.grid));
  inst.trips.push_back(make_trip("b", "r", 90, 180, 1, 1, inst.grid));
  const auto defects = validate_instance(inst);
  ASSERT_FALSE(defects.empty());
  EXPECT_NE(defects[0].find("coverage impossible at step"), std::string::npos);
  EXPECT_EQ(coverage_defects(inst).size(), defects.size());
}

TEST(Instance, InitialEnergyBelowMinimumNamesTheBus) {
  FleetInstance inst = testing::small_instance(60);
  inst.buses.push_back(testing::make_bus("B7", 30, 10, 100));
  const auto defects = validate_instance(inst);
  ASSERT_EQ(defects.size(), 1u);
  EXPECT_NE(defects[0].find("B7"), std::string::npos);
}

TEST(Instance, JsonRoundTripIsFieldForField) {
  const FleetInstance inst = desk_scale_instance(3, 20);
  const FleetInstance again = parse_instance(to_json(inst));
  EXPECT_EQ(inst, again);
  const FleetInstance fleet = marguerite_instance();
  EXPECT_EQ(fleet, parse_instance(to_json(fleet)));
}

TEST(Instance, TripEnergyMatchesMilesTimesEfficiency) {
  const FleetInstance inst = marguerite_instance();
  for (const Trip& t : inst.trips) {
    EXPECT_NEAR(t.energy(), t.miles * inst.efficiency_kwh_per_mile, 1e-9);
  }
}

TEST(Instance, MargueriteFixtureIsValid) {
  const FleetInstance inst = marguerite_instance();
  EXPECT_EQ(inst.trips.size(), 352u);
  EXPECT_EQ(inst.buses.size(), 38u);
  EXPECT_TRUE(validate_instance(inst).empty());
}

TEST(Instance, WithoutSolarZeroesTheForecast) {
  const FleetInstance inst = without_solar(desk_scale_instance(0, 10));
  for (double g : inst.solar.energy_per_step) EXPECT_EQ(g, 0.0);
}

TEST(Instance, ChargeIncrementWarnings) {
  FleetInstance inst = testing::small_instance(60);
  inst.buses.push_back(testing::make_bus("B1", 0, 50, 100));
  inst.trips.push_back(make_trip("a", "r", 60, 120, 40, 1, inst.grid));
  EXPECT_TRUE(charge_increment_warnings(inst).empty());
  inst.trips.push_back(make_trip("b", "r", 300, 360, 7, 1, inst.grid));
  EXPECT_FALSE(charge_increment_warnings(inst).empty());
}

TEST(Fixtures, BundledFilesLoad) {
  const std::filesystem::path data = EBUS_DATA_DIR;
  EXPECT_EQ(load_rates(data / "marguerite_rates.json"), table_i_rates());
  const TimeGrid grid = make_time_grid(5);
  const SolarForecast solar = load_solar(data / "solar_1mw.json", grid);
  EXPECT_EQ(solar, bell_solar(grid, 1000.0));
  EXPECT_EQ(load_instance(data / "marguerite_fleet.json"),
            marguerite_instance());
  EXPECT_EQ(load_instance(data / "marguerite_desk.json"),
            desk_scale_instance(0, 60));
}

}  // namespace
}  // namespace ebus
