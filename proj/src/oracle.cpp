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

#include "ebus/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace ebus {
namespace {

constexpr int kAm[2] = {6 * 60 + 30, 10 * 60};
constexpr int kPm[2] = {15 * 60 + 30, 19 * 60 + 30};
constexpr int kMidDay[2] = {10 * 60, 15 * 60};
constexpr int kAllDay[2] = {7 * 60, 20 * 60};

std::string two_digits(int v) {
  return (v < 10 ? "0" : "") + std::to_string(v);
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

Bus make_bus(std::string id, std::string model, double capacity) {
  return Bus{std::move(id), std::move(model), 0.20 * capacity,
             0.95 * capacity, 0.60 * capacity};
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[draw_int(rng, 0, static_cast<int>(items.size()) - 1)];
}

}  // namespace

int draw_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RateSchedule table_i_rates() {
  return RateSchedule{{
      {0, 8 * 60 + 30, 0.08422},
      {8 * 60 + 30, 12 * 60, 0.11356},
      {12 * 60, 18 * 60, 0.16127},
      {18 * 60, 21 * 60 + 30, 0.11356},
      {21 * 60 + 30, kMinutesPerDay, 0.08422},
  }};
}

RateSchedule flat_rates(double price_per_kwh) {
  return RateSchedule{{{0, kMinutesPerDay, price_per_kwh}}};
}

RateSchedule two_tier_rates() {
  return RateSchedule{{{0, 12 * 60, 0.10}, {12 * 60, kMinutesPerDay, 0.20}}};
}

SolarForecast bell_solar(const TimeGrid& grid, double peak_kw) {
  constexpr double kRise = 7 * 60;
  constexpr double kNoon = 12 * 60;
  constexpr double kSet = 19 * 60;
  std::vector<double> kw(grid.num_steps());
  for (int t = 0; t < grid.num_steps(); ++t) {
    const double m = grid.wall_clock(t) + grid.step_minutes / 2.0;
    if (m <= kRise || m >= kSet) {
      kw[t] = 0.0;
    } else if (m <= kNoon) {
      kw[t] = peak_kw * (m - kRise) / (kNoon - kRise);
    } else {
      kw[t] = peak_kw * (kSet - m) / (kSet - kNoon);
    }
  }
  return make_solar(std::move(kw), grid);
}

GeneratedInstance gen_instance(const InstanceGenConfig& cfg,
                               std::uint64_t seed) {
  std::vector<int> step_counts;
  for (int T = std::max(cfg.steps.lo, 1); T <= cfg.steps.hi; ++T) {
    if (kMinutesPerDay % T == 0) step_counts.push_back(T);
  }
  if (step_counts.empty()) {
    throw std::invalid_argument("step range contains no divisor of 1440");
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    const int T = pick(rng, step_counts);
    FleetInstance inst;
    inst.grid = make_time_grid(kMinutesPerDay / T);
    inst.efficiency_kwh_per_mile = 1.0;
    const double q = cfg.charger_kw * inst.grid.step_hours();

    const int K = draw_int(rng, cfg.buses.lo, cfg.buses.hi);
    for (int k = 0; k < K; ++k) {
      const int lo = draw_int(rng, 0, 1);
      const int hi = draw_int(rng, 4, 6);
      const int init = draw_int(rng, lo + 2, hi - 1);
      inst.buses.push_back(
          Bus{"b" + std::to_string(k), "tiny", lo * q, hi * q, init * q});
    }
    const int N = draw_int(rng, cfg.chargers.lo, cfg.chargers.hi);
    for (int n = 0; n < N; ++n) {
      inst.chargers.push_back(
          make_charger("c" + std::to_string(n), cfg.charger_kw, inst.grid));
    }

    const int I = draw_int(rng, cfg.trips.lo, cfg.trips.hi);
    std::vector<int> occupied(T, 0);
    bool placed = true;
    for (int i = 0; i < I && placed; ++i) {
      const int len = draw_int(rng, 1, std::max(1, std::min(3, T / 4)));
      const int units = draw_int(rng, 1, 2);
      int start = 0;
      if (draw_unit(rng) < cfg.overlap_probability) {
        start = draw_int(rng, 0, T - len);
      } else {
        std::vector<int> free_starts;
        for (int s = 0; s + len <= T; ++s) {
          bool clear = true;
          for (int t = s; t < s + len; ++t) clear = clear && occupied[t] == 0;
          if (clear) free_starts.push_back(s);
        }
        if (free_starts.empty()) {
          placed = false;
          break;
        }
        start = pick(rng, free_starts);
      }
      for (int t = start; t < start + len; ++t) ++occupied[t];
      const int step = inst.grid.step_minutes;
      inst.trips.push_back(make_trip("t" + std::to_string(i), "R", start * step,
                                     (start + len) * step, units * q, 1.0,
                                     inst.grid));
    }
    if (!placed) continue;

    switch (cfg.prices) {
      case PriceProfile::kFlat: inst.rates = flat_rates(0.10); break;
      case PriceProfile::kTwoTier: inst.rates = two_tier_rates(); break;
      case PriceProfile::kTableI: inst.rates = table_i_rates(); break;
    }
    inst.solar = cfg.solar == SolarProfile::kBell
                     ? bell_solar(inst.grid, cfg.solar_peak_kw)
                     : no_solar(inst.grid);
    if (validate_instance(inst).empty()) return {std::move(inst), attempt};
  }
  throw std::runtime_error(
      "gen_instance: no valid instance after " +
      std::to_string(cfg.max_attempts) + " draws (buses " +
      std::to_string(cfg.buses.lo) + "-" + std::to_string(cfg.buses.hi) +
      ", trips " + std::to_string(cfg.trips.lo) + "-" +
      std::to_string(cfg.trips.hi) + ", overlap " +
      std::to_string(cfg.overlap_probability) + ")");
}

const std::vector<RouteInfo>& marguerite_routes() {
  static const std::vector<RouteInfo> routes = [] {
    struct Row {
      const char* name;
      int trips;
      double miles;
      const int* window;
    };
    // AM/PM routes are listed once per window with the trips split
    // evenly, odd trip left in the morning.
    const Row rows[] = {
        {"C Line", 33, 7.00, kAllDay},
        {"C Limited", 11, 4.60, nullptr},
        {"MC Line (AM/PM)", 46, 3.00, nullptr},
        {"MC Line (Mid Day)", 11, 5.10, kMidDay},
        {"P Line (AM/PM)", 56, 2.50, nullptr},
        {"P Line (Mid Day)", 11, 4.00, kMidDay},
        {"Research Park (AM/PM)", 24, 10.40, nullptr},
        {"X Express (AM)", 12, 1.20, kAm},
        {"X Line", 44, 4.60, kAllDay},
        {"X Limited (AM)", 10, 2.00, kAm},
        {"X Limited (PM)", 10, 1.50, kPm},
        {"Y Express (PM)", 20, 1.20, kPm},
        {"Y Line", 44, 4.60, kAllDay},
        {"Y Limited (AM)", 10, 2.40, kAm},
        {"Y Limited (PM)", 10, 2.00, kPm},
    };
    std::vector<RouteInfo> out;
    for (const Row& r : rows) {
      if (r.window != nullptr) {
        out.push_back({r.name, r.trips, r.miles, r.window[0], r.window[1], 1});
      } else {
        const int am = (r.trips + 1) / 2;
        out.push_back({r.name, am, r.miles, kAm[0], kAm[1], 1});
        out.push_back({r.name, r.trips - am, r.miles, kPm[0], kPm[1], am + 1});
      }
    }
    return out;
  }();
  return routes;
}

nlohmann::json routes_to_json(const std::vector<RouteInfo>& routes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RouteInfo& r : routes) {
    arr.push_back({{"name", r.name},
                   {"daily_trips", r.daily_trips},
                   {"miles", r.miles},
                   {"start", format_clock(r.window_start)},
                   {"end", format_clock(r.window_end)},
                   {"first_number", r.first_number}});
  }
  return nlohmann::json{{"routes", std::move(arr)}};
}

std::vector<RouteInfo> parse_routes(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("routes") ||
      !doc["routes"].is_array()) {
    throw ParseError("routes: expected an array");
  }
  std::vector<RouteInfo> out;
  const nlohmann::json& arr = doc["routes"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "routes[" + std::to_string(i) + "]";
    auto field = [&](const char* key) -> const nlohmann::json& {
      if (!arr[i].is_object() || !arr[i].contains(key)) {
        throw ParseError(where + "." + key + ": missing");
      }
      return arr[i][key];
    };
    RouteInfo r;
    try {
      r.name = field("name").get<std::string>();
      r.daily_trips = field("daily_trips").get<int>();
      r.miles = field("miles").get<double>();
      r.window_start = parse_clock(field("start").get<std::string>(),
                                   where + ".start");
      r.window_end =
          parse_clock(field("end").get<std::string>(), where + ".end");
      r.first_number = field("first_number").get<int>();
    } catch (const nlohmann::json::type_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RouteInfo> load_routes(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path.string());
  try {
    return parse_routes(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<Trip> route_trips(const RouteInfo& route, double efficiency,
                              const TimeGrid& grid) {
  std::vector<Trip> trips;
  const int duration =
      std::max(10, static_cast<int>(std::lround(route.miles * 60.0 / 12.0)));
  const int span = route.window_end - route.window_start;
  for (int j = 0; j < route.daily_trips; ++j) {
    const int offset = j * span / route.daily_trips / 5 * 5;
    const int start = route.window_start + offset;
    trips.push_back(make_trip(slug(route.name) + "-" + two_digits(route.first_number + j),
                              route.name, start, start + duration,
                              route.miles, efficiency, grid));
  }
  return trips;
}

FleetInstance marguerite_instance() {
  FleetInstance inst;
  inst.grid = make_time_grid(5);
  for (const RouteInfo& r : marguerite_routes()) {
    for (Trip& t : route_trips(r, inst.efficiency_kwh_per_mile, inst.grid)) {
      inst.trips.push_back(std::move(t));
    }
  }
  for (int k = 1; k <= 10; ++k) {
    inst.buses.push_back(make_bus("K7-" + two_digits(k), "K7", 197.0));
  }
  for (int k = 1; k <= 10; ++k) {
    inst.buses.push_back(make_bus("K9-" + two_digits(k), "K9", 324.0));
  }
  for (int k = 1; k <= 18; ++k) {
    inst.buses.push_back(make_bus("K9M-" + two_digits(k), "K9M", 324.0));
  }
  for (int n = 1; n <= 23; ++n) {
    for (const char* port : {"a", "b"}) {
      inst.chargers.push_back(
          make_charger("D" + two_digits(n) + port, 40.0, inst.grid));
    }
  }
  inst.rates = table_i_rates();
  inst.solar = no_solar(inst.grid);
  return inst;
}

FleetInstance desk_scale_instance(std::uint64_t seed, int trips) {
  FleetInstance inst;
  inst.grid = make_time_grid(5);
  // One mile costs exactly one 40 kW step of charge, so every trip uses a
  // whole number of charging steps.
  inst.efficiency_kwh_per_mile = 40.0 / 12.0;
  std::vector<Trip> pool;
  for (const RouteInfo& r : marguerite_routes()) {
    if (r.miles != std::floor(r.miles)) continue;
    for (Trip& t : route_trips(r, inst.efficiency_kwh_per_mile, inst.grid)) {
      pool.push_back(std::move(t));
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  const int take = std::min<int>(trips, static_cast<int>(pool.size()));
  for (int i = 0; i < take; ++i) {
    std::swap(order[i],
              order[draw_int(rng, i, static_cast<int>(order.size()) - 1)]);
  }
  order.resize(take);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pool[a].start_step != pool[b].start_step) {
      return pool[a].start_step < pool[b].start_step;
    }
    return a < b;
  });
  for (int i : order) inst.trips.push_back(pool[i]);

  inst.buses = {make_bus("K7-01", "K7", 197.0),   make_bus("K7-02", "K7", 197.0),
                make_bus("K9-01", "K9", 324.0),   make_bus("K9-02", "K9", 324.0),
                make_bus("K9M-01", "K9M", 324.0), make_bus("K9M-02", "K9M", 324.0)};
  for (int n = 1; n <= 6; ++n) {
    for (const char* port : {"a", "b"}) {
      inst.chargers.push_back(
          make_charger("D" + two_digits(n) + port, 40.0, inst.grid));
    }
  }
  inst.rates = table_i_rates();
  inst.solar = bell_solar(inst.grid, 1000.0);
  return inst;
}

std::optional<Schedule> mutate(const FleetInstance& inst, const Schedule& sched,
                               Family family, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int K = sched.buses;
  const int T = sched.steps;
  Schedule out = sched;
  struct Slot {
    int k;
    int t;
  };
  auto slots = [&](auto&& pred) {
    std::vector<Slot> found;
    for (int k = 0; k < K; ++k) {
      for (int t = 0; t < T; ++t) {
        if (pred(sched.at(k, t), k, t)) found.push_back({k, t});
      }
    }
    return found;
  };
  auto driving = [](const Activity& a, int, int) { return !a.trips.empty(); };
  auto charging = [](const Activity& a, int, int) {
    return a.charging && !a.chargers.empty();
  };
  if (K == 0 || T == 0) return std::nullopt;

  switch (family) {
    case Family::k1b: {
      // Charge while driving.
      const auto cands = slots(driving);
      if (cands.empty()) return std::nullopt;
      const Slot s = pick(rng, cands);
      out.at(s.k, s.t).charging = true;
      return out;
    }
    case Family::k1c: {
      // Drop one serving step.
      const auto cands = slots(driving);
      if (cands.empty()) return std::nullopt;
      const Slot s = pick(rng, cands);
      out.at(s.k, s.t).trips.pop_back();
      return out;
    }
    case Family::k1d: {
      // Hand the last step of a multi-step trip to another bus.
      std::vector<Slot> cands;
      for (int i = 0; i < static_cast<int>(inst.trips.size()); ++i) {
        const Trip& trip = inst.trips[i];
        if (trip.num_steps() < 2 || K < 2) continue;
        for (int k = 0; k < K; ++k) {
          const auto& ts = sched.at(k, trip.end_step).trips;
          if (std::find(ts.begin(), ts.end(), i) != ts.end()) {
            cands.push_back({k, i});
          }
        }
      }
      if (cands.empty()) return std::nullopt;
      const Slot c = pick(rng, cands);
      const int t = inst.trips[c.t].end_step;
      const int other = (c.k + draw_int(rng, 1, K - 1)) % K;
      auto& from = out.at(c.k, t).trips;
      from.erase(std::find(from.begin(), from.end(), c.t));
      out.at(other, t).trips.push_back(c.t);
      return out;
    }
    case Family::k1e: {
      // Plug a second bus into a charger that is already taken.
      std::vector<Slot> cands;
      for (const Slot& s : slots(charging)) {
        for (int k = 0; k < K; ++k) {
          if (k != s.k && sched.at(k, s.t).trips.empty()) {
            cands.push_back({k, s.k * T + s.t});
          }
        }
      }
      if (cands.empty()) return std::nullopt;
      const Slot c = pick(rng, cands);
      const int owner = c.t / T;
      const int t = c.t % T;
      Activity& a = out.at(c.k, t);
      a.chargers = {sched.at(owner, t).chargers.front()};
      a.charging = true;
      return out;
    }
    case Family::k1f: {
      // Charging flag without a charger.
      const auto cands = slots(charging);
      if (cands.empty()) return std::nullopt;
      const Slot s = pick(rng, cands);
      out.at(s.k, s.t).chargers.clear();
      return out;
    }
    case Family::k1g: {
      if (T < 2) return std::nullopt;
      const int k = draw_int(rng, 0, K - 1);
      const int t = draw_int(rng, 1, T - 1);
      out.energy(k, t) += 0.5;
      return out;
    }
    case Family::k1h: {
      const int t = draw_int(rng, 0, T - 1);
      out.grid[t] += 1.0;
      return out;
    }
    case Family::k1i: {
      if (T < 2) return std::nullopt;
      const int k = draw_int(rng, 0, K - 1);
      const int t = draw_int(rng, 1, T - 1);
      out.energy(k, t) = inst.buses[k].e_max + 1.0;
      return out;
    }
    case Family::k1l: {
      const int t = draw_int(rng, 0, T - 1);
      out.solar[t] = inst.solar.energy_per_step[t] + 1.0;
      return out;
    }
    case Family::k1m: {
      const int k = draw_int(rng, 0, K - 1);
      out.energy(k, 0) += 0.5;
      return out;
    }
    case Family::k1n: {
      const int k = draw_int(rng, 0, K - 1);
      out.energy(k, T) += 0.5;
      return out;
    }
    case Family::kGridNonneg: {
      const int t = draw_int(rng, 0, T - 1);
      out.grid[t] = -1.0;
      return out;
    }
    case Family::kFixXOutsideWindow: {
      std::vector<Slot> cands;
      for (int i = 0; i < static_cast<int>(inst.trips.size()); ++i) {
        for (int k = 0; k < K; ++k) {
          for (int t = 0; t < T; ++t) {
            if (!inst.trips[i].covers(t) && sched.at(k, t).idle()) {
              cands.push_back({k, i * T + t});
            }
          }
        }
      }
      if (cands.empty()) return std::nullopt;
      const Slot c = pick(rng, cands);
      out.at(c.k, c.t % T).trips.push_back(c.t / T);
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace ebus
