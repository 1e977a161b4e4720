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

// Bounded dual simplex over sparse LU factors with product-form updates.
//
// Rows are carried as logical variables r = A x with bounds derived from the
// row sense, so the working system is [A  -I] (x, r) = 0 and the all-logical
// basis is always available as a starting point. Columns whose bounds are
// equal when the engine is built are substituted out.

#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ebus/milp.hpp"

namespace ebus {

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kCutoff,  // dual bound exceeded LpOptions::cutoff
  kIterationLimit,
  kTimeLimit,
  kNumericalFailure,
};

std::string_view to_string(LpStatus status);

struct LpOptions {
  double primal_tolerance = 1e-7;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-7;
  int refactor_interval = 100;
  long iteration_limit = -1;  // negative: unlimited
  std::optional<std::chrono::steady_clock::time_point> deadline;
  double cutoff = std::numeric_limits<double>::infinity();
  // Relative size of the cost perturbation used against dual degeneracy;
  // zero disables it. Results are always reported for the true costs.
  double perturbation = 1e-7;
};

struct LpResult {
  LpStatus status = LpStatus::kNumericalFailure;
  Eigen::VectorXd values;  // original column space
  double objective = 0.0;
  long iterations = 0;
};

// Solves the continuous relaxation of `prob` (integrality ignored).
LpResult solve_lp(const MilpProblem& prob, const LpOptions& options = {});

// Re-solvable engine for branch-and-bound: column bounds may be changed
// between solves and a previously exported basis may be reinstalled.
class DualSimplex {
 public:
  using Basis = std::vector<std::int8_t>;

  explicit DualSimplex(const MilpProblem& prob, LpOptions options = {});
  ~DualSimplex();
  DualSimplex(DualSimplex&&) noexcept;
  DualSimplex& operator=(DualSimplex&&) noexcept;

  void set_options(const LpOptions& options);
  const LpOptions& options() const;

  // Bounds of an original column.
  void set_bounds(int col, double lower, double upper);
  double lower(int col) const;
  double upper(int col) const;

  // Status of every working variable; empty before the first solve.
  Basis basis() const;
  void set_basis(const Basis& basis);

  LpStatus solve();

  Eigen::VectorXd values() const;
  double objective() const;
  long iterations() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ebus
