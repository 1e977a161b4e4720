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

#include "ebus/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ebus {
namespace {

constexpr std::string_view kFamilyNames[] = {
    "1b", "1c", "1d", "1e", "1f", "1g", "1h",
    "1i", "1l", "1m", "1n", "V-nonneg", "fix-X-outside-window",
};

void check_shape(const FleetInstance& inst, const Schedule& sched) {
  const int K = static_cast<int>(inst.buses.size());
  const int T = inst.num_steps();
  if (sched.buses != K || sched.steps != T ||
      static_cast<int>(sched.activity.size()) != K * T ||
      sched.energy.rows() != K || sched.energy.cols() != T + 1 ||
      sched.grid.size() != T || sched.solar.size() != T) {
    throw std::invalid_argument("schedule shape does not match the instance");
  }
}

bool serves(const Activity& a, int trip) {
  return std::find(a.trips.begin(), a.trips.end(), trip) != a.trips.end();
}

}  // namespace

Schedule::Schedule(int num_buses, int num_steps)
    : buses(num_buses),
      steps(num_steps),
      activity(static_cast<std::size_t>(num_buses) * num_steps),
      energy(Eigen::MatrixXd::Zero(num_buses, num_steps + 1)),
      grid(Eigen::VectorXd::Zero(num_steps)),
      solar(Eigen::VectorXd::Zero(num_steps)) {}

double Schedule::load(const FleetInstance& inst, int t) const {
  double total = 0.0;
  for (int k = 0; k < buses; ++k) {
    for (int n : at(k, t).chargers) total += inst.chargers[n].energy_per_step;
  }
  return total;
}

std::string_view to_string(Family family) {
  return kFamilyNames[static_cast<int>(family)];
}

std::optional<Family> family_from_string(std::string_view text) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

bool ValidationReport::has(Family family) const {
  return std::any_of(violations.begin(), violations.end(),
                     [family](const Violation& v) { return v.family == family; });
}

std::vector<Family> ValidationReport::families() const {
  std::vector<Family> out;
  for (const Violation& v : violations) {
    if (std::find(out.begin(), out.end(), v.family) == out.end()) {
      out.push_back(v.family);
    }
  }
  return out;
}

Schedule decode(const FleetInstance& inst, const VariableIndex& idx,
                const Eigen::VectorXd& values) {
  const int I = idx.trips();
  const int K = idx.buses();
  const int N = idx.chargers();
  const int T = idx.steps();
  Schedule sched(K, T);
  auto on = [&](int col) { return values[col] > 0.5; };
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < T; ++t) {
      Activity& a = sched.at(k, t);
      for (int i = 0; i < I; ++i) {
        if (on(idx.x(i, k, t))) a.trips.push_back(i);
      }
      for (int n = 0; n < N; ++n) {
        if (on(idx.y(n, k, t))) a.chargers.push_back(n);
      }
      a.charging = on(idx.z(k, t));
      if (a.trips.size() + (a.charging ? 1 : 0) > 1) {
        throw DecodeError("bus " + inst.buses[k].id + " step " +
                          std::to_string(t) +
                          ": solution drives and charges at once");
      }
    }
    for (int t = 0; t <= T; ++t) sched.energy(k, t) = values[idx.e(k, t)];
  }
  for (int t = 0; t < T; ++t) {
    sched.grid[t] = values[idx.v(t)];
    sched.solar[t] = values[idx.s(t)];
  }
  return sched;
}

Eigen::VectorXd encode(const FleetInstance& inst, const VariableIndex& idx,
                       const Schedule& sched) {
  check_shape(inst, sched);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(idx.size());
  for (int k = 0; k < sched.buses; ++k) {
    for (int t = 0; t < sched.steps; ++t) {
      const Activity& a = sched.at(k, t);
      for (int i : a.trips) x[idx.x(i, k, t)] = 1.0;
      for (int n : a.chargers) x[idx.y(n, k, t)] = 1.0;
      x[idx.z(k, t)] = a.charging ? 1.0 : 0.0;
    }
    for (int t = 0; t <= sched.steps; ++t) x[idx.e(k, t)] = sched.energy(k, t);
  }
  for (int t = 0; t < sched.steps; ++t) {
    x[idx.v(t)] = sched.grid[t];
    x[idx.s(t)] = sched.solar[t];
  }
  return x;
}

ValidationReport validate(const FleetInstance& inst, const Schedule& sched,
                          double tol) {
  check_shape(inst, sched);
  const int I = static_cast<int>(inst.trips.size());
  const int K = sched.buses;
  const int N = static_cast<int>(inst.chargers.size());
  const int T = sched.steps;
  ValidationReport report;
  auto add = [&](Family f, int bus, int trip, int charger, int step,
                 double amount, std::string message) {
    report.violations.push_back(
        Violation{f, bus, trip, charger, step, amount, std::move(message)});
  };
  auto where = [&](int k, int t) {
    std::ostringstream os;
    os << "bus " << inst.buses[k].id << " step " << t;
    return os.str();
  };

  // 1b, 1f and trips outside their window.
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < T; ++t) {
      const Activity& a = sched.at(k, t);
      const int uses = static_cast<int>(a.trips.size()) + (a.charging ? 1 : 0);
      if (uses > 1) {
        add(Family::k1b, k, -1, -1, t, uses - 1,
            where(k, t) + ": more than one of driving and charging");
      }
      const int plugged = static_cast<int>(a.chargers.size());
      if (plugged != (a.charging ? 1 : 0)) {
        add(Family::k1f, k, -1, -1, t, std::abs(plugged - (a.charging ? 1 : 0)),
            where(k, t) + ": charger occupancy does not match charging state");
      }
      for (int i : a.trips) {
        if (!inst.trips[i].covers(t)) {
          add(Family::kFixXOutsideWindow, k, i, -1, t, 1.0,
              where(k, t) + ": serves trip " + inst.trips[i].id +
                  " outside its window");
        }
      }
    }
  }

  // 1c and 1d.
  for (int i = 0; i < I; ++i) {
    const Trip& trip = inst.trips[i];
    for (int t = trip.start_step; t <= trip.end_step; ++t) {
      int count = 0;
      for (int k = 0; k < K; ++k) count += serves(sched.at(k, t), i);
      if (count != 1) {
        std::ostringstream os;
        os << "trip " << trip.id << " step " << t << ": served by " << count
           << " buses";
        add(Family::k1c, -1, i, -1, t, std::abs(count - 1), os.str());
      }
      if (t == trip.end_step) continue;
      for (int k = 0; k < K; ++k) {
        if (serves(sched.at(k, t), i) != serves(sched.at(k, t + 1), i)) {
          add(Family::k1d, k, i, -1, t, 1.0,
              where(k, t) + ": trip " + trip.id + " changes bus mid-route");
        }
      }
    }
  }

  // 1e.
  for (int t = 0; t < T; ++t) {
    std::vector<int> users(N, 0);
    for (int k = 0; k < K; ++k) {
      for (int n : sched.at(k, t).chargers) ++users[n];
    }
    for (int n = 0; n < N; ++n) {
      if (users[n] > 1) {
        std::ostringstream os;
        os << "charger " << inst.chargers[n].id << " step " << t << ": "
           << users[n] << " buses";
        add(Family::k1e, -1, -1, n, t, users[n] - 1, os.str());
      }
    }
  }

  // 1g, 1i, 1m, 1n.
  for (int k = 0; k < K; ++k) {
    const Bus& bus = inst.buses[k];
    for (int t = 0; t < T; ++t) {
      const Activity& a = sched.at(k, t);
      double delta = 0.0;
      for (int n : a.chargers) delta += inst.chargers[n].energy_per_step;
      for (int i : a.trips) {
        if (inst.trips[i].covers(t)) delta -= inst.trips[i].energy_per_step;
      }
      const double residual =
          sched.energy(k, t + 1) - sched.energy(k, t) - delta;
      if (std::abs(residual) > tol) {
        add(Family::k1g, k, -1, -1, t, std::abs(residual),
            where(k, t) + ": energy balance off by " +
                std::to_string(residual) + " kWh");
      }
    }
    for (int t = 0; t <= T; ++t) {
      const double e = sched.energy(k, t);
      if (e < bus.e_min - tol || e > bus.e_max + tol) {
        const double amount =
            e < bus.e_min ? bus.e_min - e : e - bus.e_max;
        add(Family::k1i, k, -1, -1, t, amount,
            where(k, t) + ": energy " + std::to_string(e) +
                " kWh outside [" + std::to_string(bus.e_min) + ", " +
                std::to_string(bus.e_max) + "]");
      }
    }
    if (std::abs(sched.energy(k, 0) - bus.e_init) > tol) {
      add(Family::k1m, k, -1, -1, 0,
          std::abs(sched.energy(k, 0) - bus.e_init),
          "bus " + bus.id + ": initial energy differs from " +
              std::to_string(bus.e_init) + " kWh");
    }
    if (std::abs(sched.energy(k, T) - bus.e_init) > tol) {
      add(Family::k1n, k, -1, -1, T,
          std::abs(sched.energy(k, T) - bus.e_init),
          "bus " + bus.id + ": final energy differs from " +
              std::to_string(bus.e_init) + " kWh");
    }
  }

  // 1h, 1l, V >= 0.
  for (int t = 0; t < T; ++t) {
    const double residual = sched.load(inst, t) - sched.grid[t] - sched.solar[t];
    std::ostringstream os;
    os << "step " << t;
    if (std::abs(residual) > tol) {
      add(Family::k1h, -1, -1, -1, t, std::abs(residual),
          os.str() + ": charger load not matched by grid plus solar");
    }
    const double g = inst.solar.energy_per_step[t];
    if (sched.solar[t] < -tol || sched.solar[t] > g + tol) {
      const double amount =
          sched.solar[t] < 0 ? -sched.solar[t] : sched.solar[t] - g;
      add(Family::k1l, -1, -1, -1, t, amount,
          os.str() + ": solar draw outside [0, forecast]");
    }
    if (sched.grid[t] < -tol) {
      add(Family::kGridNonneg, -1, -1, -1, t, -sched.grid[t],
          os.str() + ": negative grid draw");
    }
  }
  return report;
}

double cost_of(const FleetInstance& inst, const Schedule& sched) {
  const std::vector<double> price = price_vector(inst);
  double cost = 0.0;
  for (int t = 0; t < sched.steps; ++t) cost += price[t] * sched.grid[t];
  return cost;
}

void settle_power(const FleetInstance& inst, Schedule& sched) {
  for (int t = 0; t < sched.steps; ++t) {
    const double load = sched.load(inst, t);
    const double s = std::min(load, inst.solar.energy_per_step[t]);
    sched.solar[t] = s;
    sched.grid[t] = load - s;
  }
}

}  // namespace ebus
