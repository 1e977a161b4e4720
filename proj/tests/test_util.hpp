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

// Small builders shared by the unit tests.

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "ebus/fleet.hpp"
#include "ebus/milp.hpp"
#include "ebus/oracle.hpp"

namespace ebus::testing {

// Dense-to-sparse problem builder; infinite entries mean unbounded.
inline MilpProblem make_problem(const std::vector<double>& cost,
                                const std::vector<std::vector<double>>& rows,
                                const std::vector<Sense>& senses,
                                const std::vector<double>& rhs,
                                const std::vector<double>& lower,
                                const std::vector<double>& upper,
                                const std::vector<bool>& integer = {}) {
  const int n = static_cast<int>(cost.size());
  const int m = static_cast<int>(rows.size());
  MilpProblem p;
  p.objective = Eigen::Map<const Eigen::VectorXd>(cost.data(), n);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rows[i][j] != 0.0) triplets.emplace_back(i, j, rows[i][j]);
    }
  }
  p.matrix.resize(m, n);
  p.matrix.setFromTriplets(triplets.begin(), triplets.end());
  p.senses = senses;
  p.rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m);
  p.lower = Eigen::Map<const Eigen::VectorXd>(lower.data(), n);
  p.upper = Eigen::Map<const Eigen::VectorXd>(upper.data(), n);
  p.integer = integer.empty() ? std::vector<bool>(n, false) : integer;
  p.row_tags.assign(m, RowTag::k1b);
  p.bound_tags.assign(n, BoundTag::kFree);
  for (int i = 0; i < m; ++i) p.row_names.push_back("R" + std::to_string(i));
  for (int j = 0; j < n; ++j) p.col_names.push_back("C" + std::to_string(j));
  return p;
}

// One 40 kW charger on a T-step day with unit efficiency, so a trip of
// `miles` draws exactly `miles` kWh.
inline FleetInstance small_instance(int step_minutes = 90) {
  FleetInstance inst;
  inst.grid = make_time_grid(step_minutes);
  inst.efficiency_kwh_per_mile = 1.0;
  inst.rates = table_i_rates();
  inst.solar = no_solar(inst.grid);
  inst.chargers.push_back(make_charger("D1", 40.0, inst.grid));
  return inst;
}

inline Bus make_bus(const std::string& id, double e_min, double e_init,
                    double e_max) {
  return Bus{id, "test", e_min, e_max, e_init};
}

}  // namespace ebus::testing
