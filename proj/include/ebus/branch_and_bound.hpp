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

// LP-based branch-and-bound over the dual simplex engine.

#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string_view>

#include "ebus/milp.hpp"
#include "ebus/simplex.hpp"

namespace ebus {

enum class MipStatus {
  kOptimal,      // incumbent proven within the gap tolerances
  kFeasibleGap,  // a limit was reached with an incumbent in hand
  kInfeasible,
  kUnbounded,
  kLimitHit,  // a limit was reached before any incumbent was found
  kNumericalFailure,
};

std::string_view to_string(MipStatus status);

enum class NodeOrder { kBestBound, kDepthFirst };
enum class BranchRule { kMostFractional, kFirstFractional };

struct Progress {
  long nodes = 0;
  double incumbent = 0.0;  // +inf without one
  double bound = 0.0;
  double seconds = 0.0;
};

struct SolveConfig {
  double abs_gap_tol = 1e-6;
  double rel_gap_tol = 0.0;
  double integrality_tol = 1e-7;
  long node_limit = -1;      // negative: unlimited
  double time_limit = -1.0;  // seconds, negative: unlimited
  NodeOrder node_order = NodeOrder::kBestBound;
  BranchRule branch_rule = BranchRule::kMostFractional;
  std::function<void(const Progress&)> progress;
  double progress_interval = 5.0;  // seconds between progress callbacks
  // Rounding dives for incumbents: at the root, then every dive_interval
  // nodes (0: root only, negative: never).
  int dive_interval = 200;
  int dive_max_rounds = 2000;
  // Feasible point used as the starting incumbent when it checks out.
  std::optional<Eigen::VectorXd> initial_solution;
  LpOptions lp;
};

struct MipResult {
  MipStatus status = MipStatus::kNumericalFailure;
  Eigen::VectorXd values;  // empty without an incumbent
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;  // relative, (objective - bound) / max(|objective|, 1)
  long nodes = 0;
  double seconds = 0.0;
  long lp_iterations = 0;
};

MipResult branch_and_bound(const MilpProblem& prob,
                           const SolveConfig& config = {});

// Objective of `values` when it satisfies every row, bound and
// integrality restriction of `prob` to `tol`; nullopt otherwise. Throws
// std::invalid_argument when the dimension does not match.
std::optional<double> warm_start_check(const MilpProblem& prob,
                                       const Eigen::VectorXd& values,
                                       double tol = 1e-7);

}  // namespace ebus
