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

#include <cmath>
#include <filesystem>

#include "ebus/branch_and_bound.hpp"
#include "ebus/oracle.hpp"
#include "ebus/schedule.hpp"

namespace ebus {
namespace {

TEST(Draw, StaysInRange) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const int v = draw_int(rng, -2, 3);
    EXPECT_GE(v, -2);
    EXPECT_LE(v, 3);
    const double u = draw_unit(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(GenInstance, SameSeedSameInstance) {
  InstanceGenConfig cfg;
  cfg.solar = SolarProfile::kBell;
  EXPECT_EQ(gen_instance(cfg, 0).instance, gen_instance(cfg, 0).instance);
  EXPECT_NE(gen_instance(cfg, 0).instance, gen_instance(cfg, 1).instance);
}

TEST(GenInstance, ZeroOverlapMeansDisjointTrips) {
  InstanceGenConfig cfg;
  cfg.overlap_probability = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FleetInstance inst = gen_instance(cfg, seed).instance;
    for (std::size_t a = 0; a < inst.trips.size(); ++a) {
      for (std::size_t b = a + 1; b < inst.trips.size(); ++b) {
        const Trip& x = inst.trips[a];
        const Trip& y = inst.trips[b];
        EXPECT_TRUE(x.end_step < y.start_step || y.end_step < x.start_step);
      }
    }
  }
}

TEST(GenInstance, OracleSizedDrawsFitTheBruteForceGuard) {
  const BruteForceLimits limits;
  InstanceGenConfig cfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FleetInstance inst = gen_instance(cfg, seed).instance;
    EXPECT_LE(static_cast<int>(inst.buses.size()), limits.max_buses);
    EXPECT_LE(static_cast<int>(inst.trips.size()), limits.max_trips);
    EXPECT_LE(static_cast<int>(inst.chargers.size()), limits.max_chargers);
    EXPECT_LE(inst.num_steps(), limits.max_steps);
    EXPECT_TRUE(validate_instance(inst).empty());
    EXPECT_TRUE(charge_increment_warnings(inst).empty());
  }
}

TEST(GenInstance, RetryCapNamesTheConfig) {
  InstanceGenConfig cfg;
  cfg.buses = {0, 0};  // no bus can cover a trip
  cfg.trips = {1, 1};
  cfg.max_attempts = 3;
  try {
    gen_instance(cfg, 0);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("buses 0-0"), std::string::npos)
        << e.what();
  }
}

TEST(GenInstance, PriceProfiles) {
  InstanceGenConfig cfg;
  cfg.prices = PriceProfile::kTableI;
  const FleetInstance table = gen_instance(cfg, 0).instance;
  EXPECT_EQ(table.rates, table_i_rates());
  ASSERT_EQ(table_i_rates().intervals.size(), 5u);
  const double expected[] = {0.08422, 0.11356, 0.16127, 0.11356, 0.08422};
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(table_i_rates().intervals[i].price_per_kwh, expected[i]);
  }
  cfg.prices = PriceProfile::kTwoTier;
  EXPECT_EQ(gen_instance(cfg, 0).instance.rates, two_tier_rates());
  cfg.prices = PriceProfile::kFlat;
  EXPECT_EQ(gen_instance(cfg, 0).instance.rates.intervals.size(), 1u);
}

TEST(BellSolar, ZeroAtNightPeakAtNoon) {
  const TimeGrid grid = make_time_grid(5);
  const SolarForecast solar = bell_solar(grid, 1000.0);
  for (int t = 0; t < grid.num_steps(); ++t) {
    const int minute = grid.wall_clock(t);
    if (minute < 7 * 60 || minute >= 19 * 60) {
      EXPECT_EQ(solar.kw[t], 0.0);
    }
    EXPECT_LE(solar.kw[t], 1000.0);
  }
  EXPECT_GT(solar.kw[12 * 12], 990.0);
  EXPECT_NEAR(solar.energy_per_step[12 * 12], solar.kw[12 * 12] / 12.0,
              1e-12);
}

TEST(Routes, TableTwoTotals) {
  int trips = 0;
  double miles = 0.0;
  for (const RouteInfo& r : marguerite_routes()) {
    trips += r.daily_trips;
    miles += r.daily_trips * r.miles;
  }
  EXPECT_EQ(trips, 352);
  EXPECT_NEAR(miles, 1431.50, 1e-9);
}

TEST(Routes, JsonRoundTrip) {
  const auto& routes = marguerite_routes();
  EXPECT_EQ(parse_routes(routes_to_json(routes)), routes);
  EXPECT_EQ(load_routes(std::filesystem::path(EBUS_DATA_DIR) /
                        "marguerite_routes.json"),
            routes);
  nlohmann::json bad = routes_to_json(routes);
  bad["routes"][2].erase("miles");
  EXPECT_THROW(parse_routes(bad), ParseError);
}

TEST(Routes, TripsFollowTheServiceWindow) {
  const TimeGrid grid = make_time_grid(5);
  for (const RouteInfo& r : marguerite_routes()) {
    const auto trips = route_trips(r, 1.25, grid);
    ASSERT_EQ(static_cast<int>(trips.size()), r.daily_trips);
    for (const Trip& t : trips) {
      EXPECT_GE(t.start_step * 5, r.window_start);
      EXPECT_LE((t.end_step + 1) * 5, r.window_end + 60);
      EXPECT_NEAR(t.energy(), r.miles * 1.25, 1e-9);
    }
  }
}

TEST(DeskInstance, Shape) {
  const FleetInstance inst = desk_scale_instance(0, 60);
  EXPECT_EQ(inst.num_steps(), 288);
  EXPECT_EQ(inst.buses.size(), 6u);
  EXPECT_EQ(inst.chargers.size(), 12u);
  EXPECT_EQ(inst.trips.size(), 60u);
  EXPECT_EQ(inst.rates, table_i_rates());
  int small = 0;
  for (const Bus& b : inst.buses) {
    EXPECT_TRUE(b.e_max == 0.95 * 197 || b.e_max == 0.95 * 324);
    small += b.model == "K7";
  }
  EXPECT_EQ(small, 2);
  for (const Charger& c : inst.chargers) EXPECT_EQ(c.power_kw, 40.0);
  EXPECT_TRUE(validate_instance(inst).empty());
  EXPECT_TRUE(charge_increment_warnings(inst).empty());
}

struct SolvedCase {
  std::uint64_t seed;
  FleetInstance inst;
  Schedule sched;
};

// Optimal schedules of seeded two-bus instances, solved once per process.
const std::vector<SolvedCase>& solved_cases() {
  static const std::vector<SolvedCase> cases = [] {
    InstanceGenConfig cfg;
    cfg.buses = {2, 2};
    cfg.trips = {2, 4};
    cfg.solar = SolarProfile::kBell;
    std::vector<SolvedCase> out;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      FleetInstance inst = gen_instance(cfg, seed).instance;
      const MilpProblem prob = assemble(inst);
      const MipResult r = branch_and_bound(prob);
      if (r.status != MipStatus::kOptimal) continue;
      Schedule sched = decode(inst, prob.index, r.values);
      out.push_back({seed, std::move(inst), std::move(sched)});
    }
    return out;
  }();
  return cases;
}

class MutationTest : public ::testing::TestWithParam<Family> {};

TEST_P(MutationTest, NamedFamilyIsFlagged) {
  int applied = 0;
  for (const SolvedCase& c : solved_cases()) {
    const auto bad = mutate(c.inst, c.sched, GetParam(), c.seed);
    if (!bad) continue;
    ++applied;
    EXPECT_TRUE(validate(c.inst, *bad).has(GetParam()))
        << "seed " << c.seed << " family " << to_string(GetParam());
  }
  EXPECT_GT(applied, 0);
}

INSTANTIATE_TEST_SUITE_P(
    AllFamilies, MutationTest, ::testing::ValuesIn(kAllFamilies),
    [](const ::testing::TestParamInfo<Family>& info) {
      std::string name(to_string(info.param));
      for (char& c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
      }
      return "family_" + name;
    });

TEST(Mutate, SkipsWhenNothingToBreak) {
  InstanceGenConfig cfg;
  cfg.trips = {0, 0};
  const FleetInstance inst = gen_instance(cfg, 0).instance;
  const auto base = baseline_charge_on_return(inst);
  ASSERT_TRUE(base.has_value());
  EXPECT_FALSE(mutate(inst, *base, Family::k1c).has_value());
  EXPECT_FALSE(mutate(inst, *base, Family::k1f).has_value());
}

}  // namespace
}  // namespace ebus
