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

// Exhaustive reference optimum: every conflict-free trip assignment, and
// for each one a shortest path over energy states where every step tries
// every way of plugging idle buses into free chargers.

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ebus/schedule.hpp"

namespace ebus {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKeyScale = 1e6;

struct StateNode {
  std::vector<double> energy;
  double cost = 0.0;
  int parent = -1;
  int action = -1;
};

// All partial injective maps from buses to chargers; -1 means not plugged.
void enumerate_actions(int k, int buses, int chargers,
                       const std::vector<bool>& busy, std::vector<int>& current,
                       std::vector<bool>& used,
                       std::vector<std::vector<int>>& out) {
  if (k == buses) {
    out.push_back(current);
    return;
  }
  current[k] = -1;
  enumerate_actions(k + 1, buses, chargers, busy, current, used, out);
  if (busy[k]) return;
  for (int n = 0; n < chargers; ++n) {
    if (used[n]) continue;
    used[n] = true;
    current[k] = n;
    enumerate_actions(k + 1, buses, chargers, busy, current, used, out);
    used[n] = false;
  }
  current[k] = -1;
}

}  // namespace

BruteForceResult brute_force_optimum(const FleetInstance& inst,
                                     const BruteForceLimits& limits) {
  const int I = static_cast<int>(inst.trips.size());
  const int K = static_cast<int>(inst.buses.size());
  const int N = static_cast<int>(inst.chargers.size());
  const int T = inst.num_steps();
  if (K > limits.max_buses || I > limits.max_trips ||
      N > limits.max_chargers || T > limits.max_steps) {
    throw std::invalid_argument("instance too large for exhaustive search");
  }
  constexpr double tol = kValidationTol;
  const std::vector<double> price = price_vector(inst);
  const std::vector<double>& solar = inst.solar.energy_per_step;

  BruteForceResult result;
  result.cost = kInf;
  std::vector<int> assign(I, -1);

  auto evaluate = [&]() {
    ++result.assignments;
    std::vector<std::vector<bool>> busy(T, std::vector<bool>(K, false));
    std::vector<std::vector<double>> drain(T, std::vector<double>(K, 0.0));
    for (int i = 0; i < I; ++i) {
      const Trip& trip = inst.trips[i];
      for (int t = trip.start_step; t <= trip.end_step; ++t) {
        busy[t][assign[i]] = true;
        drain[t][assign[i]] += trip.energy_per_step;
      }
    }
    std::vector<StateNode> nodes;
    std::vector<std::vector<std::vector<int>>> actions(T);
    StateNode root;
    for (const Bus& b : inst.buses) root.energy.push_back(b.e_init);
    nodes.push_back(root);
    std::vector<int> layer{0};
    for (int t = 0; t < T; ++t) {
      std::vector<int> current(K, -1);
      std::vector<bool> used(N, false);
      enumerate_actions(0, K, N, busy[t], current, used, actions[t]);
      std::map<std::vector<long long>, int> next;
      for (int id : layer) {
        for (int a = 0; a < static_cast<int>(actions[t].size()); ++a) {
          const std::vector<int>& plug = actions[t][a];
          StateNode child;
          child.energy = nodes[id].energy;
          double load = 0.0;
          bool ok = true;
          for (int k = 0; k < K && ok; ++k) {
            double q = 0.0;
            if (plug[k] >= 0) q = inst.chargers[plug[k]].energy_per_step;
            load += q;
            child.energy[k] += q - drain[t][k];
            ok = child.energy[k] >= inst.buses[k].e_min - tol &&
                 child.energy[k] <= inst.buses[k].e_max + tol;
          }
          if (!ok) continue;
          ++result.states;
          child.cost =
              nodes[id].cost + price[t] * std::max(0.0, load - solar[t]);
          child.parent = id;
          child.action = a;
          std::vector<long long> key(K);
          for (int k = 0; k < K; ++k) {
            key[k] = std::llround(child.energy[k] * kKeyScale);
          }
          auto [it, inserted] =
              next.emplace(std::move(key), static_cast<int>(nodes.size()));
          if (inserted) {
            nodes.push_back(std::move(child));
          } else if (child.cost < nodes[it->second].cost) {
            nodes[it->second] = std::move(child);
          }
        }
      }
      layer.clear();
      for (const auto& [key, id] : next) layer.push_back(id);
    }
    int best = -1;
    for (int id : layer) {
      bool ends_home = true;
      for (int k = 0; k < K; ++k) {
        ends_home = ends_home &&
                    std::abs(nodes[id].energy[k] - inst.buses[k].e_init) <= tol;
      }
      if (ends_home && (best < 0 || nodes[id].cost < nodes[best].cost)) {
        best = id;
      }
    }
    if (best < 0 || nodes[best].cost >= result.cost) return;

    Schedule sched(K, T);
    for (int i = 0; i < I; ++i) {
      const Trip& trip = inst.trips[i];
      for (int t = trip.start_step; t <= trip.end_step; ++t) {
        sched.at(assign[i], t).trips.push_back(i);
      }
    }
    int id = best;
    for (int t = T; t >= 0; --t) {
      for (int k = 0; k < K; ++k) sched.energy(k, t) = nodes[id].energy[k];
      if (t == 0) break;
      const std::vector<int>& plug = actions[t - 1][nodes[id].action];
      for (int k = 0; k < K; ++k) {
        if (plug[k] < 0) continue;
        sched.at(k, t - 1).chargers.push_back(plug[k]);
        sched.at(k, t - 1).charging = true;
      }
      id = nodes[id].parent;
    }
    settle_power(inst, sched);
    result.feasible = true;
    result.cost = nodes[best].cost;
    result.schedule = std::move(sched);
  };

  // Depth-first over trips, skipping buses already driving an overlapping
  // trip.
  auto assign_from = [&](auto&& self, int i) -> void {
    if (i == I) {
      evaluate();
      return;
    }
    const Trip& trip = inst.trips[i];
    for (int k = 0; k < K; ++k) {
      bool clash = false;
      for (int j = 0; j < i && !clash; ++j) {
        const Trip& other = inst.trips[j];
        clash = assign[j] == k && other.start_step <= trip.end_step &&
                trip.start_step <= other.end_step;
      }
      if (clash) continue;
      assign[i] = k;
      self(self, i + 1);
    }
    assign[i] = -1;
  };
  assign_from(assign_from, 0);
  if (!result.feasible) result.cost = 0.0;
  return result;
}

}  // namespace ebus
