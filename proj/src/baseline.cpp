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

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ebus/schedule.hpp"

namespace ebus {

std::optional<Schedule> baseline_charge_on_return(const FleetInstance& inst,
                                                  std::string* why) {
  constexpr double tol = kValidationTol;
  const int I = static_cast<int>(inst.trips.size());
  const int K = static_cast<int>(inst.buses.size());
  const int N = static_cast<int>(inst.chargers.size());
  const int T = inst.num_steps();
  auto fail = [why](const std::string& reason) -> std::optional<Schedule> {
    if (why != nullptr) *why = reason;
    return std::nullopt;
  };

  std::vector<int> order(I);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.trips[a].start_step < inst.trips[b].start_step;
  });

  Schedule sched(K, T);
  std::vector<double> e(K);
  for (int k = 0; k < K; ++k) e[k] = inst.buses[k].e_init;
  std::vector<int> current_trip(K, -1);
  std::vector<int> plugged(K, -1);
  std::vector<int> user(N, -1);
  auto unplug = [&](int k) {
    if (plugged[k] >= 0) user[plugged[k]] = -1;
    plugged[k] = -1;
  };

  std::size_t next = 0;
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      sched.energy(k, t) = e[k];
      if (current_trip[k] >= 0 && inst.trips[current_trip[k]].end_step < t) {
        current_trip[k] = -1;
      }
    }
    for (; next < order.size() && inst.trips[order[next]].start_step == t;
         ++next) {
      const int i = order[next];
      const Trip& trip = inst.trips[i];
      int best = -1;
      for (int k = 0; k < K; ++k) {
        if (current_trip[k] >= 0) continue;
        if (best < 0 || e[k] > e[best]) best = k;
      }
      if (best < 0) {
        std::ostringstream os;
        os << "no free bus for trip " << trip.id << " at step " << t;
        return fail(os.str());
      }
      if (e[best] - trip.energy() < inst.buses[best].e_min - tol) {
        std::ostringstream os;
        os << "trip " << trip.id << " needs " << trip.energy()
           << " kWh but the fullest free bus " << inst.buses[best].id
           << " would fall below its minimum";
        return fail(os.str());
      }
      current_trip[best] = i;
      unplug(best);
    }
    for (int k = 0; k < K; ++k) {
      Activity& a = sched.at(k, t);
      if (current_trip[k] >= 0) {
        const Trip& trip = inst.trips[current_trip[k]];
        a.trips.push_back(current_trip[k]);
        e[k] -= trip.energy_per_step;
        continue;
      }
      const double cap = inst.buses[k].e_max + tol;
      if (plugged[k] >= 0 &&
          e[k] + inst.chargers[plugged[k]].energy_per_step > cap) {
        unplug(k);
      }
      if (plugged[k] < 0) {
        for (int n = 0; n < N; ++n) {
          if (user[n] < 0 && e[k] + inst.chargers[n].energy_per_step <= cap) {
            plugged[k] = n;
            user[n] = k;
            break;
          }
        }
      }
      if (plugged[k] >= 0) {
        a.chargers.push_back(plugged[k]);
        a.charging = true;
        e[k] += inst.chargers[plugged[k]].energy_per_step;
      }
    }
  }
  for (int k = 0; k < K; ++k) sched.energy(k, T) = e[k];

  // Give back the latest charging steps until each bus ends where it began.
  for (int k = 0; k < K; ++k) {
    const Bus& bus = inst.buses[k];
    double excess = sched.energy(k, T) - bus.e_init;
    if (excess < -tol) {
      return fail("bus " + bus.id + " ends the day below its initial energy");
    }
    for (int t = T - 1; t >= 0 && excess > tol; --t) {
      Activity& a = sched.at(k, t);
      if (!a.charging) continue;
      const double q = inst.chargers[a.chargers.front()].energy_per_step;
      if (q > excess + tol) continue;
      double lowest = sched.energy(k, t + 1);
      for (int u = t + 1; u <= T; ++u) {
        lowest = std::min(lowest, sched.energy(k, u));
      }
      if (lowest - q < bus.e_min - tol) continue;
      a.chargers.clear();
      a.charging = false;
      for (int u = t + 1; u <= T; ++u) sched.energy(k, u) -= q;
      excess -= q;
    }
    if (std::abs(excess) > tol) {
      return fail("bus " + bus.id +
                  " cannot be trimmed back to its initial energy");
    }
    sched.energy(k, T) = bus.e_init;
  }
  settle_power(inst, sched);
  return sched;
}

}  // namespace ebus
