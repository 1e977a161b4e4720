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

#include "ebus/milp.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace ebus {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string bracketed(std::string_view head, std::initializer_list<int> idx) {
  std::string out(head);
  out += '[';
  bool first = true;
  for (int i : idx) {
    if (!first) out += ',';
    out += std::to_string(i);
    first = false;
  }
  out += ']';
  return out;
}

std::string row_name(const LinearRow& row) {
  std::string out(tag_label(row.tag));
  out += '[';
  for (std::size_t j = 0; j < row.key.size(); ++j) {
    if (j > 0) out += ',';
    out += std::to_string(row.key[j]);
  }
  out += ']';
  return out;
}

}  // namespace

VariableIndex::VariableIndex(int trips, int buses, int chargers, int steps)
    : trips_(trips), buses_(buses), chargers_(chargers), steps_(steps) {
  offset_[0] = 0;
  offset_[1] = offset_[0] + trips * buses * steps;
  offset_[2] = offset_[1] + buses * steps;
  offset_[3] = offset_[2] + chargers * buses * steps;
  offset_[4] = offset_[3] + buses * (steps + 1);
  offset_[5] = offset_[4] + steps;
  offset_[6] = offset_[5] + steps;
}

VariableIndex::VariableIndex(const FleetInstance& inst)
    : VariableIndex(static_cast<int>(inst.trips.size()),
                    static_cast<int>(inst.buses.size()),
                    static_cast<int>(inst.chargers.size()),
                    inst.num_steps()) {}

int VariableIndex::count(VarKind kind) const {
  const int k = static_cast<int>(kind);
  return offset_[k + 1] - offset_[k];
}

VarRef VariableIndex::locate(int col) const {
  if (col < 0 || col >= size()) {
    throw std::out_of_range("column " + std::to_string(col) +
                            " outside the variable index");
  }
  VarRef ref;
  if (col < offset_[1]) {
    const int rel = col - offset_[0];
    ref.kind = VarKind::kX;
    ref.step = rel % steps_;
    ref.bus = (rel / steps_) % buses_;
    ref.trip = rel / (steps_ * buses_);
  } else if (col < offset_[2]) {
    const int rel = col - offset_[1];
    ref.kind = VarKind::kZ;
    ref.step = rel % steps_;
    ref.bus = rel / steps_;
  } else if (col < offset_[3]) {
    const int rel = col - offset_[2];
    ref.kind = VarKind::kY;
    ref.step = rel % steps_;
    ref.bus = (rel / steps_) % buses_;
    ref.charger = rel / (steps_ * buses_);
  } else if (col < offset_[4]) {
    const int rel = col - offset_[3];
    ref.kind = VarKind::kE;
    ref.step = rel % (steps_ + 1);
    ref.bus = rel / (steps_ + 1);
  } else if (col < offset_[5]) {
    ref.kind = VarKind::kV;
    ref.step = col - offset_[4];
  } else {
    ref.kind = VarKind::kS;
    ref.step = col - offset_[5];
  }
  return ref;
}

std::string VariableIndex::name(int col) const {
  const VarRef r = locate(col);
  switch (r.kind) {
    case VarKind::kX: return bracketed("X", {r.trip, r.bus, r.step});
    case VarKind::kZ: return bracketed("Z", {r.bus, r.step});
    case VarKind::kY: return bracketed("Y", {r.charger, r.bus, r.step});
    case VarKind::kE: return bracketed("E", {r.bus, r.step});
    case VarKind::kV: return bracketed("V", {r.step});
    case VarKind::kS: return bracketed("S", {r.step});
  }
  return {};
}

std::string_view tag_label(RowTag tag) {
  switch (tag) {
    case RowTag::k1b: return "1b";
    case RowTag::k1c: return "1c";
    case RowTag::k1d: return "1d";
    case RowTag::k1e: return "1e";
    case RowTag::k1f: return "1f";
    case RowTag::k1g: return "1g";
    case RowTag::k1h: return "1h";
    case RowTag::k1m: return "1m";
    case RowTag::k1n: return "1n";
  }
  return "?";
}

std::string_view tag_label(BoundTag tag) {
  switch (tag) {
    case BoundTag::kBinary: return "binary";
    case BoundTag::kFixXOutsideWindow: return "fix-X-outside-window";
    case BoundTag::kEnergy: return "1i";
    case BoundTag::kSolar: return "1l";
    case BoundTag::kGridNonneg: return "V-nonneg";
    case BoundTag::kFree: return "free";
  }
  return "?";
}

std::optional<RowTag> row_tag_from_label(std::string_view label) {
  static constexpr std::array<RowTag, 9> kTags = {
      RowTag::k1b, RowTag::k1c, RowTag::k1d, RowTag::k1e, RowTag::k1f,
      RowTag::k1g, RowTag::k1h, RowTag::k1m, RowTag::k1n};
  for (RowTag tag : kTags) {
    if (label.substr(0, 2) == tag_label(tag)) return tag;
  }
  return std::nullopt;
}

Eigen::VectorXd build_objective(const FleetInstance& inst,
                                const VariableIndex& idx) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(idx.size());
  for (int t = 0; t < idx.steps(); ++t) {
    c[idx.v(t)] = price_at(inst.rates, t, inst.grid);
  }
  return c;
}

RowBlock build_exclusivity(const FleetInstance&, const VariableIndex& idx) {
  RowBlock rows;
  rows.reserve(static_cast<std::size_t>(idx.buses()) * idx.steps());
  for (int k = 0; k < idx.buses(); ++k) {
    for (int t = 0; t < idx.steps(); ++t) {
      LinearRow row{{}, Sense::kLessEqual, 1.0, RowTag::k1b, {k, t}};
      row.terms.reserve(1 + idx.trips());
      row.terms.emplace_back(idx.z(k, t), 1.0);
      for (int i = 0; i < idx.trips(); ++i) {
        row.terms.emplace_back(idx.x(i, k, t), 1.0);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

RowBlock build_coverage(const FleetInstance& inst, const VariableIndex& idx) {
  RowBlock rows;
  for (int i = 0; i < idx.trips(); ++i) {
    const Trip& trip = inst.trips[i];
    for (int t = trip.start_step; t <= trip.end_step; ++t) {
      LinearRow row{{}, Sense::kEqual, 1.0, RowTag::k1c, {i, t}};
      for (int k = 0; k < idx.buses(); ++k) {
        row.terms.emplace_back(idx.x(i, k, t), 1.0);
      }
      rows.push_back(std::move(row));
    }
  }
  for (int i = 0; i < idx.trips(); ++i) {
    const Trip& trip = inst.trips[i];
    for (int k = 0; k < idx.buses(); ++k) {
      for (int t = trip.start_step; t < trip.end_step; ++t) {
        rows.push_back(LinearRow{
            {{idx.x(i, k, t + 1), 1.0}, {idx.x(i, k, t), -1.0}},
            Sense::kEqual,
            0.0,
            RowTag::k1d,
            {i, k, t}});
      }
    }
  }
  return rows;
}

RowBlock build_charger_rows(const FleetInstance&, const VariableIndex& idx) {
  RowBlock rows;
  for (int n = 0; n < idx.chargers(); ++n) {
    for (int t = 0; t < idx.steps(); ++t) {
      LinearRow row{{}, Sense::kLessEqual, 1.0, RowTag::k1e, {n, t}};
      for (int k = 0; k < idx.buses(); ++k) {
        row.terms.emplace_back(idx.y(n, k, t), 1.0);
      }
      rows.push_back(std::move(row));
    }
  }
  for (int k = 0; k < idx.buses(); ++k) {
    for (int t = 0; t < idx.steps(); ++t) {
      LinearRow row{{}, Sense::kEqual, 0.0, RowTag::k1f, {k, t}};
      for (int n = 0; n < idx.chargers(); ++n) {
        row.terms.emplace_back(idx.y(n, k, t), 1.0);
      }
      row.terms.emplace_back(idx.z(k, t), -1.0);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

RowBlock build_energy_dynamics(const FleetInstance& inst,
                               const VariableIndex& idx) {
  RowBlock rows;
  for (int k = 0; k < idx.buses(); ++k) {
    for (int t = 0; t < idx.steps(); ++t) {
      LinearRow row{{}, Sense::kEqual, 0.0, RowTag::k1g, {k, t + 1}};
      row.terms.emplace_back(idx.e(k, t + 1), 1.0);
      row.terms.emplace_back(idx.e(k, t), -1.0);
      for (int n = 0; n < idx.chargers(); ++n) {
        row.terms.emplace_back(idx.y(n, k, t),
                               -inst.chargers[n].energy_per_step);
      }
      for (int i = 0; i < idx.trips(); ++i) {
        if (inst.trips[i].covers(t)) {
          row.terms.emplace_back(idx.x(i, k, t),
                                 inst.trips[i].energy_per_step);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

RowBlock build_power_balance(const FleetInstance& inst,
                             const VariableIndex& idx) {
  RowBlock rows;
  for (int t = 0; t < idx.steps(); ++t) {
    LinearRow row{{}, Sense::kEqual, 0.0, RowTag::k1h, {t}};
    for (int n = 0; n < idx.chargers(); ++n) {
      for (int k = 0; k < idx.buses(); ++k) {
        row.terms.emplace_back(idx.y(n, k, t),
                               inst.chargers[n].energy_per_step);
      }
    }
    row.terms.emplace_back(idx.v(t), -1.0);
    row.terms.emplace_back(idx.s(t), -1.0);
    rows.push_back(std::move(row));
  }
  return rows;
}

BoundSet build_bounds(const FleetInstance& inst, const VariableIndex& idx) {
  BoundSet b;
  b.lower = Eigen::VectorXd::Zero(idx.size());
  b.upper = Eigen::VectorXd::Ones(idx.size());
  b.tags.assign(idx.size(), BoundTag::kBinary);
  for (int i = 0; i < idx.trips(); ++i) {
    const Trip& trip = inst.trips[i];
    for (int k = 0; k < idx.buses(); ++k) {
      for (int t = 0; t < idx.steps(); ++t) {
        if (!trip.covers(t)) {
          b.upper[idx.x(i, k, t)] = 0.0;
          b.tags[idx.x(i, k, t)] = BoundTag::kFixXOutsideWindow;
        }
      }
    }
  }
  for (int k = 0; k < idx.buses(); ++k) {
    for (int t = 0; t <= idx.steps(); ++t) {
      b.lower[idx.e(k, t)] = inst.buses[k].e_min;
      b.upper[idx.e(k, t)] = inst.buses[k].e_max;
      b.tags[idx.e(k, t)] = BoundTag::kEnergy;
    }
  }
  for (int t = 0; t < idx.steps(); ++t) {
    b.lower[idx.v(t)] = 0.0;
    b.upper[idx.v(t)] = kInf;
    b.tags[idx.v(t)] = BoundTag::kGridNonneg;
    b.lower[idx.s(t)] = 0.0;
    b.upper[idx.s(t)] = inst.solar.energy_per_step[t];
    b.tags[idx.s(t)] = BoundTag::kSolar;
  }
  return b;
}

RowBlock build_boundary(const FleetInstance& inst, const VariableIndex& idx) {
  RowBlock rows;
  for (int k = 0; k < idx.buses(); ++k) {
    rows.push_back(LinearRow{{{idx.e(k, 0), 1.0}},
                             Sense::kEqual,
                             inst.buses[k].e_init,
                             RowTag::k1m,
                             {k}});
  }
  for (int k = 0; k < idx.buses(); ++k) {
    rows.push_back(LinearRow{{{idx.e(k, idx.steps()), 1.0}},
                             Sense::kEqual,
                             inst.buses[k].e_init,
                             RowTag::k1n,
                             {k}});
  }
  return rows;
}

MilpProblem assemble(const FleetInstance& inst) {
  const std::vector<std::string> defects = validate_instance(inst);
  if (!defects.empty()) {
    std::string msg = "instance has defects:";
    for (const std::string& d : defects) msg += "\n  " + d;
    throw InstanceError(msg);
  }

  MilpProblem prob;
  prob.index = VariableIndex(inst);
  const VariableIndex& idx = prob.index;
  prob.objective = build_objective(inst, idx);

  std::vector<RowBlock> blocks;
  blocks.push_back(build_exclusivity(inst, idx));
  blocks.push_back(build_coverage(inst, idx));
  blocks.push_back(build_charger_rows(inst, idx));
  blocks.push_back(build_energy_dynamics(inst, idx));
  blocks.push_back(build_power_balance(inst, idx));
  blocks.push_back(build_boundary(inst, idx));

  std::size_t num_rows = 0;
  std::size_t nnz = 0;
  for (const RowBlock& block : blocks) {
    num_rows += block.size();
    for (const LinearRow& row : block) nnz += row.terms.size();
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz);
  prob.senses.reserve(num_rows);
  prob.row_tags.reserve(num_rows);
  prob.row_names.reserve(num_rows);
  prob.rhs.resize(static_cast<Eigen::Index>(num_rows));
  int r = 0;
  for (const RowBlock& block : blocks) {
    for (const LinearRow& row : block) {
      for (const auto& [col, coef] : row.terms) {
        triplets.emplace_back(r, col, coef);
      }
      prob.senses.push_back(row.sense);
      prob.rhs[r] = row.rhs;
      prob.row_tags.push_back(row.tag);
      prob.row_names.push_back(row_name(row));
      ++r;
    }
  }
  prob.matrix.resize(r, idx.size());
  prob.matrix.setFromTriplets(triplets.begin(), triplets.end());
  prob.matrix.makeCompressed();

  BoundSet bounds = build_bounds(inst, idx);
  prob.lower = std::move(bounds.lower);
  prob.upper = std::move(bounds.upper);
  prob.bound_tags = std::move(bounds.tags);
  prob.integer.resize(idx.size());
  prob.col_names.reserve(idx.size());
  for (int j = 0; j < idx.size(); ++j) {
    prob.integer[j] = idx.is_binary(j);
    prob.col_names.push_back(idx.name(j));
  }
  return prob;
}

std::string debug_dump(const MilpProblem& prob) {
  std::ostringstream os;
  os.precision(17);
  auto col_name = [&](int j) {
    return j < static_cast<int>(prob.col_names.size()) ? prob.col_names[j]
                                                       : "c" + std::to_string(j);
  };
  os << "min:";
  for (int j = 0; j < prob.num_cols(); ++j) {
    if (prob.objective[j] != 0.0) os << ' ' << prob.objective[j] << ' ' << col_name(j);
  }
  os << '\n';
  for (int r = 0; r < prob.num_rows(); ++r) {
    os << (r < static_cast<int>(prob.row_tags.size())
               ? tag_label(prob.row_tags[r])
               : std::string_view("row"))
       << ':';
    bool first = true;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             prob.matrix, r);
         it; ++it) {
      os << (first ? " " : " + ") << it.value() << ' ' << col_name(it.col());
      first = false;
    }
    switch (prob.senses[r]) {
      case Sense::kLessEqual: os << " <= "; break;
      case Sense::kEqual: os << " = "; break;
      case Sense::kGreaterEqual: os << " >= "; break;
    }
    os << prob.rhs[r] << '\n';
  }
  return os.str();
}

}  // namespace ebus
