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

#include <charconv>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "ebus/schedule.hpp"

namespace ebus {
namespace {

constexpr std::string_view kScheduleHeader =
    "bus_id,step,wall_clock,activity,detail_id,energy_kwh";
constexpr std::string_view kSeriesHeader =
    "step,wall_clock,total_charge_kw,grid_kw,solar_kw,price_per_kwh";

// Shortest text that reads back to the same double.
std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string clock_at(const TimeGrid& grid, int t) {
  if (t == grid.num_steps() && grid.day_start_minutes == 0) {
    return format_clock(kMinutesPerDay);
  }
  return format_clock(grid.wall_clock(t));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

[[noreturn]] void bad(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

int to_int(const std::string& s, int line, std::string_view field) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    bad(line, std::string(field) + " is not an integer: '" + s + "'");
  }
  return v;
}

double to_double(const std::string& s, int line, std::string_view field) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    bad(line, std::string(field) + " is not a number: '" + s + "'");
  }
  return v;
}

template <typename T>
std::unordered_map<std::string, int> index_by_id(const std::vector<T>& items) {
  std::unordered_map<std::string, int> out;
  for (int i = 0; i < static_cast<int>(items.size()); ++i) out[items[i].id] = i;
  return out;
}

}  // namespace

void write_schedule_csv(std::ostream& os, const FleetInstance& inst,
                        const Schedule& sched) {
  os << kScheduleHeader << '\n';
  for (int k = 0; k < sched.buses; ++k) {
    const std::string& bus = inst.buses[k].id;
    for (int t = 0; t < sched.steps; ++t) {
      const Activity& a = sched.at(k, t);
      const std::string prefix =
          bus + ',' + std::to_string(t) + ',' + clock_at(inst.grid, t) + ',';
      const std::string energy = num(sched.energy(k, t));
      bool wrote = false;
      for (int i : a.trips) {
        os << prefix << "trip," << inst.trips[i].id << ',' << energy << '\n';
        wrote = true;
      }
      for (int n : a.chargers) {
        os << prefix << "charge," << inst.chargers[n].id << ',' << energy
           << '\n';
        wrote = true;
      }
      if (a.charging && a.chargers.empty()) {
        os << prefix << "charge,," << energy << '\n';
        wrote = true;
      }
      if (!wrote) os << prefix << "idle,," << energy << '\n';
    }
    os << bus << ',' << sched.steps << ',' << clock_at(inst.grid, sched.steps)
       << ",end,," << num(sched.energy(k, sched.steps)) << '\n';
  }
}

void write_series_csv(std::ostream& os, const FleetInstance& inst,
                      const Schedule& sched) {
  const double h = inst.grid.step_hours();
  const std::vector<double> price = price_vector(inst);
  os << kSeriesHeader << '\n';
  for (int t = 0; t < sched.steps; ++t) {
    os << t << ',' << clock_at(inst.grid, t) << ','
       << num(sched.load(inst, t) / h) << ',' << num(sched.grid[t] / h) << ','
       << num(sched.solar[t] / h) << ',' << num(price[t]) << '\n';
  }
}

Schedule read_schedule_csv(std::istream& is, const FleetInstance& inst) {
  const int K = static_cast<int>(inst.buses.size());
  const int T = inst.num_steps();
  const auto buses = index_by_id(inst.buses);
  const auto trips = index_by_id(inst.trips);
  const auto chargers = index_by_id(inst.chargers);
  Schedule sched(K, T);
  std::vector<char> seen(static_cast<std::size_t>(K) * (T + 1), 0);

  std::string line;
  int line_no = 1;
  if (!std::getline(is, line) || split(line) != split(std::string(kScheduleHeader))) {
    bad(line_no, "expected header '" + std::string(kScheduleHeader) + "'");
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 6) bad(line_no, "expected 6 fields");
    auto bus_it = buses.find(f[0]);
    if (bus_it == buses.end()) bad(line_no, "unknown bus '" + f[0] + "'");
    const int k = bus_it->second;
    const int t = to_int(f[1], line_no, "step");
    if (t < 0 || t > T) bad(line_no, "step out of range");
    const std::string& kind = f[3];
    if ((kind == "end") != (t == T)) {
      bad(line_no, "'end' rows belong to step " + std::to_string(T) + " only");
    }
    if (kind == "trip") {
      auto it = trips.find(f[4]);
      if (it == trips.end()) bad(line_no, "unknown trip '" + f[4] + "'");
      sched.at(k, t).trips.push_back(it->second);
    } else if (kind == "charge") {
      sched.at(k, t).charging = true;
      if (!f[4].empty()) {
        auto it = chargers.find(f[4]);
        if (it == chargers.end()) bad(line_no, "unknown charger '" + f[4] + "'");
        sched.at(k, t).chargers.push_back(it->second);
      }
    } else if (kind != "idle" && kind != "end") {
      bad(line_no, "unknown activity '" + kind + "'");
    }
    const double e = to_double(f[5], line_no, "energy_kwh");
    char& mark = seen[static_cast<std::size_t>(k) * (T + 1) + t];
    if (!mark) sched.energy(k, t) = e;
    mark = 1;
  }
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t <= T; ++t) {
      if (!seen[static_cast<std::size_t>(k) * (T + 1) + t]) {
        throw ParseError("no row for bus " + inst.buses[k].id + " step " +
                         std::to_string(t));
      }
    }
  }
  return sched;
}

void read_series_csv(std::istream& is, const FleetInstance& inst,
                     Schedule& sched) {
  const int T = inst.num_steps();
  const double h = inst.grid.step_hours();
  std::vector<char> seen(T, 0);
  std::string line;
  int line_no = 1;
  if (!std::getline(is, line) || split(line) != split(std::string(kSeriesHeader))) {
    bad(line_no, "expected header '" + std::string(kSeriesHeader) + "'");
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 6) bad(line_no, "expected 6 fields");
    const int t = to_int(f[0], line_no, "step");
    if (t < 0 || t >= T) bad(line_no, "step out of range");
    sched.grid[t] = to_double(f[3], line_no, "grid_kw") * h;
    sched.solar[t] = to_double(f[4], line_no, "solar_kw") * h;
    seen[t] = 1;
  }
  for (int t = 0; t < T; ++t) {
    if (!seen[t]) throw ParseError("no row for step " + std::to_string(t));
  }
}

}  // namespace ebus
