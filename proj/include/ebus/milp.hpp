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

// Joint route-assignment / charge-scheduling MILP.
//
// Variables (kinds in column order, indices lexicographic inside a kind):
//   X[i,k,t]  bus k serves trip i during step t           binary
//   Z[k,t]    bus k charges during step t                 binary
//   Y[n,k,t]  bus k occupies charger n during step t      binary
//   E[k,t]    energy of bus k at instant t, t = 0..T      continuous, kWh
//   V[t]      energy bought from the grid in step t       continuous, kWh
//   S[t]      energy taken from on-site solar in step t   continuous, kWh
//
// Step t moves bus energy from E[k,t] to E[k,t+1]. Rows are emitted family
// by family: 1b, 1c, 1d, 1e, 1f, 1g, 1h, 1m, 1n.

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebus/fleet.hpp"

namespace ebus {

enum class VarKind { kX, kZ, kY, kE, kV, kS };

struct VarRef {
  VarKind kind = VarKind::kX;
  int trip = -1;
  int bus = -1;
  int charger = -1;
  int step = -1;
};

class VariableIndex {
 public:
  VariableIndex() = default;
  VariableIndex(int trips, int buses, int chargers, int steps);
  explicit VariableIndex(const FleetInstance& inst);

  int x(int i, int k, int t) const {
    return offset_[0] + (i * buses_ + k) * steps_ + t;
  }
  int z(int k, int t) const { return offset_[1] + k * steps_ + t; }
  int y(int n, int k, int t) const {
    return offset_[2] + (n * buses_ + k) * steps_ + t;
  }
  int e(int k, int t) const { return offset_[3] + k * (steps_ + 1) + t; }
  int v(int t) const { return offset_[4] + t; }
  int s(int t) const { return offset_[5] + t; }

  int size() const { return offset_[6]; }
  int count(VarKind kind) const;
  int offset(VarKind kind) const { return offset_[static_cast<int>(kind)]; }
  bool is_binary(int col) const { return col < offset_[3]; }

  int trips() const { return trips_; }
  int buses() const { return buses_; }
  int chargers() const { return chargers_; }
  int steps() const { return steps_; }

  VarRef locate(int col) const;
  // "X[i,k,t]", "E[k,t]", "V[t]", ...
  std::string name(int col) const;

  friend bool operator==(const VariableIndex&, const VariableIndex&) = default;

 private:
  int trips_ = 0;
  int buses_ = 0;
  int chargers_ = 0;
  int steps_ = 0;
  std::array<int, 7> offset_{};
};

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

// Which constraint family a row implements.
enum class RowTag { k1b, k1c, k1d, k1e, k1f, k1g, k1h, k1m, k1n };

// Why a column carries the bounds it does.
enum class BoundTag {
  kBinary,             // 1j, 1k, 1l-binary: [0, 1]
  kFixXOutsideWindow,  // X outside its trip window: [0, 0]
  kEnergy,             // 1i: [E_min, E_max]
  kSolar,              // 1l: [0, g(t)]
  kGridNonneg,         // V >= 0
  kFree,
};

std::string_view tag_label(RowTag tag);
std::string_view tag_label(BoundTag tag);
std::optional<RowTag> row_tag_from_label(std::string_view label);

struct LinearRow {
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::kEqual;
  double rhs = 0.0;
  RowTag tag = RowTag::k1b;
  // Family-local indices, e.g. {k, t} for 1b; used only for naming.
  std::vector<int> key;
};

using RowBlock = std::vector<LinearRow>;

struct BoundSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<BoundTag> tags;
};

struct MilpProblem {
  Eigen::VectorXd objective;  // minimized
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  std::vector<Sense> senses;
  Eigen::VectorXd rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<bool> integer;
  std::vector<RowTag> row_tags;
  std::vector<BoundTag> bound_tags;
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  VariableIndex index;  // default-constructed for problems not built here

  int num_rows() const { return static_cast<int>(matrix.rows()); }
  int num_cols() const { return static_cast<int>(matrix.cols()); }
};

// Coefficient p(t) on each V[t], zero elsewhere.
Eigen::VectorXd build_objective(const FleetInstance& inst,
                                const VariableIndex& idx);
// 1b: Z[k,t] + sum_i X[i,k,t] <= 1.
RowBlock build_exclusivity(const FleetInstance& inst, const VariableIndex& idx);
// 1c: sum_k X[i,k,t] = 1 on the window; 1d: X[i,k,t+1] - X[i,k,t] = 0.
RowBlock build_coverage(const FleetInstance& inst, const VariableIndex& idx);
// 1e: sum_k Y[n,k,t] <= 1; 1f: sum_n Y[n,k,t] - Z[k,t] = 0.
RowBlock build_charger_rows(const FleetInstance& inst,
                            const VariableIndex& idx);
// 1g: E[k,t+1] - E[k,t] - sum_n q_n Y[n,k,t] + sum_i d_i X[i,k,t] = 0.
RowBlock build_energy_dynamics(const FleetInstance& inst,
                               const VariableIndex& idx);
// 1h: sum_{n,k} q_n Y[n,k,t] - V[t] - S[t] = 0.
RowBlock build_power_balance(const FleetInstance& inst,
                             const VariableIndex& idx);
// 1i, 1l, binaries, V >= 0 and X fixed to zero outside trip windows.
BoundSet build_bounds(const FleetInstance& inst, const VariableIndex& idx);
// 1m: E[k,0] = e_init; 1n: E[k,T] = e_init.
RowBlock build_boundary(const FleetInstance& inst, const VariableIndex& idx);

// Throws InstanceError listing the defects when validate_instance is not
// empty.
MilpProblem assemble(const FleetInstance& inst);

// Human-readable listing, one row per line: `tag: coef var + ... <= rhs`.
std::string debug_dump(const MilpProblem& prob);

struct MpsExport {
  std::string text;
  // "short long" lines; empty when every long name fits the 8-character
  // fixed-format field.
  std::string name_map;
};

MpsExport export_mps(const MilpProblem& prob);

// Reads the COLUMNS/ROWS/RHS/BOUNDS/MARKER subset written by export_mps
// (and any standard MPS without RANGES). Row tags are recovered from row
// names when they carry a family prefix. `name_map` is optional.
MilpProblem parse_mps(const std::string& text,
                      const std::string& name_map = {});

}  // namespace ebus
