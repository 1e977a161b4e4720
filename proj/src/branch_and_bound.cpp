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

#include "ebus/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace ebus {
namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct BoundChange {
  int col = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct Node {
  std::vector<BoundChange> changes;  // cumulative from the root
  std::shared_ptr<const DualSimplex::Basis> basis;
  double bound = -kInf;
  int depth = 0;
  long id = 0;
};

// Heap order: smallest bound on top, then deeper, then older.
struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

class NodePool {
 public:
  explicit NodePool(NodeOrder order) : order_(order) {}

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }

  void push(Node node) {
    nodes_.push_back(std::move(node));
    if (order_ == NodeOrder::kBestBound) {
      std::push_heap(nodes_.begin(), nodes_.end(), WorseNode{});
    }
  }

  Node pop() {
    if (order_ == NodeOrder::kBestBound) {
      std::pop_heap(nodes_.begin(), nodes_.end(), WorseNode{});
    }
    Node node = std::move(nodes_.back());
    nodes_.pop_back();
    return node;
  }

  double min_bound() const {
    if (nodes_.empty()) return kInf;
    if (order_ == NodeOrder::kBestBound) return nodes_.front().bound;
    double b = kInf;
    for (const Node& n : nodes_) b = std::min(b, n.bound);
    return b;
  }

 private:
  NodeOrder order_;
  std::vector<Node> nodes_;
};

int pick_branch_column(const MilpProblem& prob, const Eigen::VectorXd& x,
                       const SolveConfig& config) {
  int best = -1;
  double best_score = 0.0;
  for (int j = 0; j < prob.num_cols(); ++j) {
    if (!prob.integer[j]) continue;
    const double frac = x[j] - std::floor(x[j]);
    const double score = std::min(frac, 1.0 - frac);
    if (score <= config.integrality_tol) continue;
    if (config.branch_rule == BranchRule::kFirstFractional) return j;
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(MipStatus status) {
  switch (status) {
    case MipStatus::kOptimal: return "optimal";
    case MipStatus::kFeasibleGap: return "feasible-gap";
    case MipStatus::kInfeasible: return "infeasible";
    case MipStatus::kUnbounded: return "unbounded";
    case MipStatus::kLimitHit: return "limit-hit";
    case MipStatus::kNumericalFailure: return "numerical-failure";
  }
  return "?";
}

std::optional<double> warm_start_check(const MilpProblem& prob,
                                       const Eigen::VectorXd& values,
                                       double tol) {
  if (values.size() != prob.num_cols()) {
    throw std::invalid_argument("warm start has " +
                                std::to_string(values.size()) +
                                " values for " +
                                std::to_string(prob.num_cols()) + " columns");
  }
  for (int j = 0; j < prob.num_cols(); ++j) {
    const double v = values[j];
    if (!std::isfinite(v)) return std::nullopt;
    if (v < prob.lower[j] - tol || v > prob.upper[j] + tol) return std::nullopt;
    if (prob.integer[j] && std::abs(v - std::round(v)) > tol) {
      return std::nullopt;
    }
  }
  const Eigen::VectorXd activity = prob.matrix * values;
  for (int r = 0; r < prob.num_rows(); ++r) {
    const double a = activity[r];
    const double b = prob.rhs[r];
    switch (prob.senses[r]) {
      case Sense::kLessEqual:
        if (a > b + tol) return std::nullopt;
        break;
      case Sense::kGreaterEqual:
        if (a < b - tol) return std::nullopt;
        break;
      case Sense::kEqual:
        if (std::abs(a - b) > tol) return std::nullopt;
        break;
    }
  }
  return prob.objective.dot(values);
}

namespace {

// Turns an LP point that is integral to tolerance into an exact one:
// integers are rounded, and when that breaks a row the continuous part is
// re-solved with the integers held fixed.
std::optional<Eigen::VectorXd> polish(const MilpProblem& prob,
                                      Eigen::VectorXd x,
                                      const SolveConfig& config) {
  for (int j = 0; j < prob.num_cols(); ++j) {
    if (prob.integer[j]) x[j] = std::round(x[j]);
  }
  if (warm_start_check(prob, x)) return x;
  MilpProblem fixed = prob;
  for (int j = 0; j < prob.num_cols(); ++j) {
    if (prob.integer[j]) fixed.lower[j] = fixed.upper[j] = x[j];
  }
  LpOptions opts = config.lp;
  opts.cutoff = kInf;
  const LpResult res = solve_lp(fixed, opts);
  if (res.status != LpStatus::kOptimal) return std::nullopt;
  Eigen::VectorXd y = res.values;
  for (int j = 0; j < prob.num_cols(); ++j) {
    if (prob.integer[j]) y[j] = x[j];
  }
  if (warm_start_check(prob, y)) return y;
  return std::nullopt;
}

// Rounding dive from the engine's current LP point: fixes batches of the
// integer columns nearest to integrality and re-solves. A batch that makes
// the LP infeasible or raises its objective is undone and retried smaller;
// a single column takes whichever rounding keeps the LP cheaper. Column
// bounds are restored before returning.
std::optional<Eigen::VectorXd> dive(DualSimplex& engine,
                                    const MilpProblem& prob, Eigen::VectorXd x,
                                    double objective, const SolveConfig& config,
                                    const LpOptions& options) {
  struct Saved {
    int col;
    double lower;
    double upper;
  };
  std::vector<Saved> saved;
  std::optional<Eigen::VectorXd> found;
  engine.set_options(options);
  double fraction = 0.25;
  auto expired = [&] {
    return options.deadline && Clock::now() > *options.deadline;
  };
  auto no_worse = [&](double value) {
    return value <= objective + 1e-9 + 1e-9 * std::abs(objective);
  };
  for (int round = 0; round < config.dive_max_rounds && !expired(); ++round) {
    std::vector<std::pair<double, int>> frac;
    for (int j = 0; j < prob.num_cols(); ++j) {
      if (!prob.integer[j]) continue;
      const double d = std::abs(x[j] - std::round(x[j]));
      if (d > config.integrality_tol) frac.emplace_back(d, j);
    }
    if (frac.empty()) {
      found = polish(prob, x, config);
      break;
    }
    std::sort(frac.begin(), frac.end());
    const std::size_t take = std::max<std::size_t>(
        1, static_cast<std::size_t>(frac.size() * fraction));
    if (take > 1) {
      std::vector<Saved> batch;
      for (std::size_t b = 0; b < take; ++b) {
        const int col = frac[b].second;
        batch.push_back({col, engine.lower(col), engine.upper(col)});
        const double r = std::round(x[col]);
        engine.set_bounds(col, r, r);
      }
      if (engine.solve() == LpStatus::kOptimal && no_worse(engine.objective())) {
        saved.insert(saved.end(), batch.begin(), batch.end());
        x = engine.values();
        objective = engine.objective();
        fraction = std::min(0.25, fraction * 2.0);
        continue;
      }
      for (const Saved& b : batch) engine.set_bounds(b.col, b.lower, b.upper);
      fraction /= 4.0;
      continue;
    }

    const int col = frac.front().second;
    const Saved before{col, engine.lower(col), engine.upper(col)};
    const double near = std::round(x[col]);
    const double far = near > x[col] ? near - 1.0 : near + 1.0;
    double best_value = kInf;
    double best_side = near;
    Eigen::VectorXd best_x;
    for (double side : {near, far}) {
      if (side < before.lower || side > before.upper) continue;
      engine.set_bounds(col, side, side);
      if (engine.solve() == LpStatus::kOptimal &&
          engine.objective() < best_value) {
        best_value = engine.objective();
        best_side = side;
        best_x = engine.values();
        if (no_worse(best_value)) break;
      }
    }
    if (best_value == kInf) {
      engine.set_bounds(col, before.lower, before.upper);
      break;
    }
    engine.set_bounds(col, best_side, best_side);
    saved.push_back(before);
    x = std::move(best_x);
    objective = best_value;
    fraction = std::min(0.25, fraction * 2.0);
  }
  for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
    engine.set_bounds(it->col, it->lower, it->upper);
  }
  return found;
}

}  // namespace

MipResult branch_and_bound(const MilpProblem& prob, const SolveConfig& config) {
  const auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  LpOptions lp_options = config.lp;
  if (config.time_limit >= 0) {
    lp_options.deadline =
        start + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(config.time_limit));
  }

  MipResult result;
  double incumbent = kInf;
  Eigen::VectorXd best;
  if (config.initial_solution) {
    if (auto obj = warm_start_check(prob, *config.initial_solution)) {
      incumbent = *obj;
      best = *config.initial_solution;
    }
  }
  auto gap_tol = [&](double inc) {
    return std::max(config.abs_gap_tol, config.rel_gap_tol * std::abs(inc));
  };

  DualSimplex engine(prob, lp_options);
  const Eigen::VectorXd root_lower = prob.lower;
  const Eigen::VectorXd root_upper = prob.upper;
  std::vector<int> applied;

  NodePool pool(config.node_order);
  long next_id = 0;
  pool.push(Node{{}, nullptr, -kInf, 0, next_id++});

  long nodes = 0;
  bool limit_reached = false;
  bool numerical_trouble = false;
  bool root_unbounded = false;
  double lost_bound = kInf;  // bounds of nodes dropped on numerical failure
  double last_report = 0.0;

  auto global_bound = [&] {
    return std::min({pool.min_bound(), lost_bound, incumbent});
  };
  auto report = [&] {
    if (!config.progress) return;
    config.progress(Progress{nodes, incumbent, global_bound(), elapsed()});
  };

  while (!pool.empty()) {
    if (incumbent < kInf && incumbent - global_bound() <= gap_tol(incumbent)) {
      break;
    }
    if ((config.node_limit >= 0 && nodes >= config.node_limit) ||
        (config.time_limit >= 0 && elapsed() >= config.time_limit)) {
      limit_reached = true;
      break;
    }
    Node node = pool.pop();
    if (node.bound >= incumbent - gap_tol(incumbent)) continue;

    for (int col : applied) {
      engine.set_bounds(col, root_lower[col], root_upper[col]);
    }
    applied.clear();
    for (const BoundChange& c : node.changes) {
      engine.set_bounds(c.col, c.lower, c.upper);
      applied.push_back(c.col);
    }
    if (node.basis) engine.set_basis(*node.basis);
    LpOptions opts = lp_options;
    opts.cutoff = incumbent < kInf ? incumbent - gap_tol(incumbent) : kInf;
    engine.set_options(opts);

    ++nodes;
    LpStatus status = engine.solve();
    if (status == LpStatus::kNumericalFailure) {
      engine.set_basis({});
      status = engine.solve();
    }
    if (status == LpStatus::kTimeLimit) {
      pool.push(std::move(node));
      limit_reached = true;
      break;
    }
    if (status == LpStatus::kNumericalFailure ||
        status == LpStatus::kIterationLimit) {
      numerical_trouble = true;
      lost_bound = std::min(lost_bound, node.bound);
      continue;
    }
    if (status == LpStatus::kUnbounded) {
      if (node.depth == 0) root_unbounded = true;
      numerical_trouble = true;
      lost_bound = std::min(lost_bound, node.bound);
      continue;
    }
    if (status != LpStatus::kOptimal) continue;  // infeasible or cut off

    const double obj = engine.objective();
    if (obj >= incumbent - gap_tol(incumbent)) continue;
    const Eigen::VectorXd x = engine.values();
    const int col = pick_branch_column(prob, x, config);
    if (col < 0) {
      if (auto polished = polish(prob, x, config)) {
        const double value = prob.objective.dot(*polished);
        if (value < incumbent) {
          incumbent = value;
          best = std::move(*polished);
        }
      } else {
        numerical_trouble = true;
        lost_bound = std::min(lost_bound, std::max(node.bound, obj));
      }
    } else {
      auto basis = std::make_shared<const DualSimplex::Basis>(engine.basis());
      const bool dive_here =
          config.dive_interval >= 0 &&
          (node.depth == 0 ||
           (config.dive_interval > 0 && nodes % config.dive_interval == 0));
      if (dive_here) {
        LpOptions dive_options = lp_options;
        dive_options.cutoff =
            incumbent < kInf ? incumbent - gap_tol(incumbent) : kInf;
        if (auto found = dive(engine, prob, x, obj, config, dive_options)) {
          const double value = prob.objective.dot(*found);
          if (value < incumbent) {
            incumbent = value;
            best = std::move(*found);
          }
        }
      }
      const double child_bound = std::max(node.bound, obj);
      const double v = x[col];
      Node up{node.changes, basis, child_bound, node.depth + 1, next_id++};
      up.changes.push_back({col, std::ceil(v), engine.upper(col)});
      Node down{std::move(node.changes), basis, child_bound, node.depth + 1,
                next_id++};
      down.changes.push_back({col, engine.lower(col), std::floor(v)});
      pool.push(std::move(up));
      pool.push(std::move(down));
    }
    if (config.progress && elapsed() - last_report >= config.progress_interval) {
      last_report = elapsed();
      report();
    }
  }

  result.nodes = nodes;
  result.lp_iterations = engine.iterations();
  result.seconds = elapsed();
  result.bound = global_bound();
  if (incumbent < kInf) {
    result.values = best;
    result.objective = incumbent;
    result.gap = (incumbent - result.bound) / std::max(std::abs(incumbent), 1.0);
    const bool closed = incumbent - result.bound <= gap_tol(incumbent);
    result.status = closed ? MipStatus::kOptimal : MipStatus::kFeasibleGap;
  } else if (limit_reached) {
    result.status = MipStatus::kLimitHit;
  } else if (root_unbounded) {
    result.status = MipStatus::kUnbounded;
    result.bound = -kInf;
  } else if (numerical_trouble) {
    result.status = MipStatus::kNumericalFailure;
  } else {
    result.status = MipStatus::kInfeasible;
    result.bound = kInf;
  }
  report();
  return result;
}

}  // namespace ebus
