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

#include "ebus/simplex.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>

namespace ebus {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Stand-in for an infinite bound that a dual feasible start needs to be
// finite. A solution resting on one is reported as unbounded.
constexpr double kArtificialBound = 1e7;
constexpr double kDropTolerance = 1e-13;
constexpr double kMinWeight = 1e-6;
// Consecutive dual-degenerate pivots before switching to Bland's rule.
constexpr int kDegenerateRunLimit = 300;

enum : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kAtZero = 3 };

// Column `row` of the basis was replaced; `index`/`value` hold the
// off-pivot entries of B^-1 a_q at the time of the update.
struct Eta {
  int row = 0;
  double pivot = 1.0;
  std::vector<int> index;
  std::vector<double> value;
};

void row_bounds(Sense sense, double rhs, double& lo, double& hi) {
  switch (sense) {
    case Sense::kLessEqual:
      lo = -kInf;
      hi = rhs;
      break;
    case Sense::kGreaterEqual:
      lo = rhs;
      hi = kInf;
      break;
    case Sense::kEqual:
      lo = hi = rhs;
      break;
  }
}

}  // namespace

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kCutoff: return "cutoff";
    case LpStatus::kIterationLimit: return "iteration-limit";
    case LpStatus::kTimeLimit: return "time-limit";
    case LpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "?";
}

class DualSimplex::Impl {
 public:
  Impl(const MilpProblem& prob, LpOptions options);

  void set_bounds(int col, double lo, double hi);
  double lower(int col) const;
  double upper(int col) const;
  Basis basis() const { return has_basis_ ? status_ : Basis{}; }
  void set_basis(const Basis& basis);
  LpStatus solve();
  Eigen::VectorXd values() const;
  double objective() const;

  LpOptions opt_;
  long iterations_ = 0;

 private:
  int total() const { return n_ + m_; }
  bool is_fixed(int j) const { return lower_[j] == upper_[j]; }

  void slack_basis();
  void place_nonbasic(int j, double reduced_cost);
  bool refactor();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void compute_primal();
  void compute_dual();
  bool repair_dual_infeasibilities();
  void recompute();
  double working_objective() const;
  int choose_leaving(bool bland) const;
  void compute_pivot_row(const Eigen::VectorXd& rho);
  int ratio_test(int sigma, bool bland) const;
  void perturb_costs();
  void load_column(int q, Eigen::VectorXd& column) const;
  void push_eta(int r, const Eigen::VectorXd& column);
  double max_primal_infeasibility() const;
  LpStatus dual_phase();
  LpStatus primal_phase();

  // Model.
  int m_ = 0;
  int n_ = 0;
  std::vector<int> kept_;        // working column -> original column
  std::vector<int> working_of_;  // original column -> working column or -1
  std::vector<double> removed_value_;
  std::vector<char> removed_conflict_;
  int conflicts_ = 0;
  Eigen::SparseMatrix<double> a_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_rows_;
  std::vector<double> base_cost_;
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<char> artificial_;
  double cost_offset_ = 0.0;
  // Largest amount by which the perturbed objective can exceed the true one
  // anywhere inside the bounds.
  double perturbation_slack_ = 0.0;

  // Basis state.
  bool has_basis_ = false;
  std::vector<int> head_;
  Basis status_;
  std::vector<double> x_;
  std::vector<double> d_;
  std::vector<double> weight_;
  // transpose() is non-const in Eigen 3.4.
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>,
                          Eigen::COLAMDOrdering<int>>
      lu_;
  std::vector<Eta> etas_;

  // Pivot row scratch.
  std::vector<double> alpha_;
  std::vector<char> touched_mark_;
  std::vector<int> touched_;
};

DualSimplex::Impl::Impl(const MilpProblem& prob, LpOptions options)
    : opt_(std::move(options)) {
  const int orig_n = prob.num_cols();
  m_ = prob.num_rows();
  working_of_.assign(orig_n, -1);
  removed_value_.assign(orig_n, 0.0);
  removed_conflict_.assign(orig_n, 0);
  for (int j = 0; j < orig_n; ++j) {
    if (prob.lower[j] == prob.upper[j]) {
      removed_value_[j] = prob.lower[j];
      cost_offset_ += prob.objective[j] * prob.lower[j];
    } else {
      working_of_[j] = static_cast<int>(kept_.size());
      kept_.push_back(j);
    }
  }
  n_ = static_cast<int>(kept_.size());

  std::vector<double> fixed_activity(m_, 0.0);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(prob.matrix.nonZeros());
  for (int r = 0; r < m_; ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             prob.matrix, r);
         it; ++it) {
      const int w = working_of_[it.col()];
      if (w >= 0) {
        triplets.emplace_back(r, w, it.value());
      } else {
        fixed_activity[r] += it.value() * removed_value_[it.col()];
      }
    }
  }
  a_.resize(m_, n_);
  a_.setFromTriplets(triplets.begin(), triplets.end());
  a_.makeCompressed();
  a_rows_ = a_;
  a_rows_.makeCompressed();

  const int N = total();
  base_cost_.assign(N, 0.0);
  lower_.assign(N, 0.0);
  upper_.assign(N, 0.0);
  artificial_.assign(N, 0);
  for (int w = 0; w < n_; ++w) {
    base_cost_[w] = prob.objective[kept_[w]];
    lower_[w] = prob.lower[kept_[w]];
    upper_[w] = prob.upper[kept_[w]];
  }
  for (int r = 0; r < m_; ++r) {
    double lo = 0.0;
    double hi = 0.0;
    row_bounds(prob.senses[r], prob.rhs[r] - fixed_activity[r], lo, hi);
    lower_[n_ + r] = lo;
    upper_[n_ + r] = hi;
  }
  cost_ = base_cost_;
  alpha_.assign(N, 0.0);
  touched_mark_.assign(N, 0);
}

void DualSimplex::Impl::set_bounds(int col, double lo, double hi) {
  const int w = working_of_[col];
  if (w < 0) {
    const double v = removed_value_[col];
    const bool conflict = lo > v + opt_.primal_tolerance ||
                          hi < v - opt_.primal_tolerance;
    if (conflict != static_cast<bool>(removed_conflict_[col])) {
      conflicts_ += conflict ? 1 : -1;
      removed_conflict_[col] = conflict;
    }
    return;
  }
  lower_[w] = lo;
  upper_[w] = hi;
  artificial_[w] = 0;
}

double DualSimplex::Impl::lower(int col) const {
  const int w = working_of_[col];
  return w < 0 ? removed_value_[col] : lower_[w];
}

double DualSimplex::Impl::upper(int col) const {
  const int w = working_of_[col];
  return w < 0 ? removed_value_[col] : upper_[w];
}

void DualSimplex::Impl::set_basis(const Basis& basis) {
  if (static_cast<int>(basis.size()) != total()) {
    has_basis_ = false;
    return;
  }
  int basic = 0;
  for (std::int8_t s : basis) basic += s == kBasic;
  if (basic != m_) {
    has_basis_ = false;
    return;
  }
  status_ = basis;
  head_.clear();
  for (int j = 0; j < total(); ++j) {
    if (status_[j] == kBasic) head_.push_back(j);
  }
  x_.assign(total(), 0.0);
  d_.assign(total(), 0.0);
  weight_.assign(m_, 1.0);
  etas_.clear();
  has_basis_ = true;
}

void DualSimplex::Impl::slack_basis() {
  const int N = total();
  status_.assign(N, kAtLower);
  head_.resize(m_);
  for (int r = 0; r < m_; ++r) {
    head_[r] = n_ + r;
    status_[n_ + r] = kBasic;
  }
  x_.assign(N, 0.0);
  d_.assign(N, 0.0);
  weight_.assign(m_, 1.0);
  etas_.clear();
  cost_ = base_cost_;
  for (int j = 0; j < n_; ++j) place_nonbasic(j, cost_[j]);
  has_basis_ = true;
}

// Puts nonbasic `j` on the bound its reduced cost asks for, inventing a
// finite bound when the natural one is infinite.
void DualSimplex::Impl::place_nonbasic(int j, double reduced_cost) {
  const bool has_lo = std::isfinite(lower_[j]);
  const bool has_hi = std::isfinite(upper_[j]);
  std::int8_t s = status_[j];
  if (s == kAtLower && has_lo) {
    x_[j] = lower_[j];
    return;
  }
  if (s == kAtUpper && has_hi) {
    x_[j] = upper_[j];
    return;
  }
  if (s == kAtZero && !has_lo && !has_hi) {
    x_[j] = 0.0;
    return;
  }
  if (has_lo && (reduced_cost >= 0 || !has_hi)) {
    s = kAtLower;
    if (reduced_cost < -opt_.dual_tolerance && !has_hi) {
      upper_[j] = kArtificialBound;
      artificial_[j] = 1;
      s = kAtUpper;
    }
  } else if (has_hi) {
    s = kAtUpper;
    if (reduced_cost > opt_.dual_tolerance && !has_lo) {
      lower_[j] = -kArtificialBound;
      artificial_[j] = 1;
      s = kAtLower;
    }
  } else if (std::abs(reduced_cost) <= opt_.dual_tolerance) {
    s = kAtZero;
  } else if (reduced_cost > 0) {
    lower_[j] = -kArtificialBound;
    artificial_[j] = 1;
    s = kAtLower;
  } else {
    upper_[j] = kArtificialBound;
    artificial_[j] = 1;
    s = kAtUpper;
  }
  status_[j] = s;
  x_[j] = s == kAtLower ? lower_[j] : s == kAtUpper ? upper_[j] : 0.0;
}

bool DualSimplex::Impl::refactor() {
  etas_.clear();
  if (m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(m_) * 3);
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    if (j < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) {
        triplets.emplace_back(static_cast<int>(it.row()), r, it.value());
      }
    } else {
      triplets.emplace_back(j - n_, r, -1.0);
    }
  }
  Eigen::SparseMatrix<double> basis(m_, m_);
  basis.setFromTriplets(triplets.begin(), triplets.end());
  basis.makeCompressed();
  lu_.analyzePattern(basis);
  lu_.factorize(basis);
  return lu_.info() == Eigen::Success;
}

void DualSimplex::Impl::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  Eigen::VectorXd solved = lu_.solve(v);
  v.swap(solved);
  for (const Eta& eta : etas_) {
    const double vr = v[eta.row] / eta.pivot;
    v[eta.row] = vr;
    if (vr == 0.0) continue;
    for (std::size_t k = 0; k < eta.index.size(); ++k) {
      v[eta.index[k]] -= eta.value[k] * vr;
    }
  }
}

void DualSimplex::Impl::btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double acc = v[it->row];
    for (std::size_t k = 0; k < it->index.size(); ++k) {
      acc -= it->value[k] * v[it->index[k]];
    }
    v[it->row] = acc / it->pivot;
  }
  Eigen::VectorXd solved = lu_.transpose().solve(v);
  v.swap(solved);
}

void DualSimplex::Impl::compute_primal() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == kBasic || x_[j] == 0.0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) {
      rhs[it.row()] -= it.value() * x_[j];
    }
  }
  for (int r = 0; r < m_; ++r) {
    const int j = n_ + r;
    if (status_[j] != kBasic) rhs[r] += x_[j];
  }
  ftran(rhs);
  for (int r = 0; r < m_; ++r) x_[head_[r]] = rhs[r];
}

void DualSimplex::Impl::compute_dual() {
  Eigen::VectorXd y(m_);
  for (int r = 0; r < m_; ++r) y[r] = cost_[head_[r]];
  btran(y);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == kBasic) {
      d_[j] = 0.0;
      continue;
    }
    double dj = cost_[j];
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) {
      dj -= it.value() * y[it.row()];
    }
    d_[j] = dj;
  }
  for (int r = 0; r < m_; ++r) {
    const int j = n_ + r;
    d_[j] = status_[j] == kBasic ? 0.0 : cost_[j] + y[r];
  }
}

// Restores dual feasibility after a fresh recomputation: boxed variables
// flip to the other bound, the rest absorb the error into their cost.
// Returns true when a flip moved the primal solution.
bool DualSimplex::Impl::repair_dual_infeasibilities() {
  bool flipped = false;
  const double tol = opt_.dual_tolerance;
  for (int j = 0; j < total(); ++j) {
    const std::int8_t s = status_[j];
    if (s == kBasic || is_fixed(j)) continue;
    const double dj = d_[j];
    if (s == kAtLower && dj < -tol) {
      if (std::isfinite(upper_[j])) {
        status_[j] = kAtUpper;
        x_[j] = upper_[j];
        flipped = true;
      } else {
        cost_[j] -= dj;
        d_[j] = 0.0;
      }
    } else if (s == kAtUpper && dj > tol) {
      if (std::isfinite(lower_[j])) {
        status_[j] = kAtLower;
        x_[j] = lower_[j];
        flipped = true;
      } else {
        cost_[j] -= dj;
        d_[j] = 0.0;
      }
    } else if (s == kAtZero && std::abs(dj) > tol) {
      cost_[j] -= dj;
      d_[j] = 0.0;
    }
  }
  return flipped;
}

void DualSimplex::Impl::recompute() {
  compute_dual();
  for (int j = 0; j < total(); ++j) {
    if (status_[j] != kBasic) place_nonbasic(j, d_[j]);
  }
  repair_dual_infeasibilities();
  compute_primal();
}

double DualSimplex::Impl::working_objective() const {
  double obj = cost_offset_;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

int DualSimplex::Impl::choose_leaving(bool bland) const {
  const double tol = opt_.primal_tolerance;
  int best = -1;
  double best_score = 0.0;
  int best_var = total();
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    const double v = x_[j];
    double infeas = 0.0;
    if (v < lower_[j] - tol) {
      infeas = lower_[j] - v;
    } else if (v > upper_[j] + tol) {
      infeas = v - upper_[j];
    } else {
      continue;
    }
    if (bland) {
      if (j < best_var) {
        best_var = j;
        best = r;
      }
      continue;
    }
    const double score = infeas * infeas / weight_[r];
    if (score > best_score) {
      best_score = score;
      best = r;
    }
  }
  return best;
}

void DualSimplex::Impl::compute_pivot_row(const Eigen::VectorXd& rho) {
  for (int j : touched_) {
    alpha_[j] = 0.0;
    touched_mark_[j] = 0;
  }
  touched_.clear();
  for (int r = 0; r < m_; ++r) {
    const double rr = rho[r];
    if (std::abs(rr) <= kDropTolerance) continue;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             a_rows_, r);
         it; ++it) {
      const int j = static_cast<int>(it.col());
      if (status_[j] == kBasic) continue;
      if (!touched_mark_[j]) {
        touched_mark_[j] = 1;
        touched_.push_back(j);
      }
      alpha_[j] += rr * it.value();
    }
    const int logical = n_ + r;
    if (status_[logical] != kBasic) {
      touched_mark_[logical] = 1;
      touched_.push_back(logical);
      alpha_[logical] = -rr;
    }
  }
}

// Returns the entering variable, or -1 when the pivot row proves the
// primal problem infeasible. `sigma` is -1 when the leaving variable moves
// up to its lower bound and +1 when it moves down to its upper bound.
int DualSimplex::Impl::ratio_test(int sigma, bool bland) const {
  const double tol = opt_.dual_tolerance;
  const double piv = opt_.pivot_tolerance;

  auto eligible_ratio = [&](int j, double& ratio, double& relaxed) {
    const double a = sigma * alpha_[j];
    if (std::abs(a) < piv || is_fixed(j)) return false;
    switch (status_[j]) {
      case kAtLower:
        if (a <= 0) return false;
        ratio = d_[j] / a;
        relaxed = (d_[j] + tol) / a;
        return true;
      case kAtUpper:
        if (a >= 0) return false;
        ratio = d_[j] / a;
        relaxed = (d_[j] - tol) / a;
        return true;
      case kAtZero:
        ratio = std::abs(d_[j]) / std::abs(a);
        relaxed = (std::abs(d_[j]) + tol) / std::abs(a);
        return true;
      default:
        return false;
    }
  };

  if (bland) {
    int best = -1;
    double best_ratio = kInf;
    for (int j : touched_) {
      double ratio = 0.0;
      double relaxed = 0.0;
      if (!eligible_ratio(j, ratio, relaxed)) continue;
      ratio = std::max(ratio, 0.0);
      if (ratio < best_ratio || (ratio == best_ratio && j < best)) {
        best_ratio = ratio;
        best = j;
      }
    }
    return best;
  }

  double bound = kInf;
  for (int j : touched_) {
    double ratio = 0.0;
    double relaxed = 0.0;
    if (eligible_ratio(j, ratio, relaxed)) bound = std::min(bound, relaxed);
  }
  if (bound == kInf) return -1;

  int best = -1;
  double best_alpha = 0.0;
  for (int j : touched_) {
    double ratio = 0.0;
    double relaxed = 0.0;
    if (!eligible_ratio(j, ratio, relaxed) || ratio > bound) continue;
    const double a = std::abs(alpha_[j]);
    if (a > best_alpha || (a == best_alpha && j < best)) {
      best_alpha = a;
      best = j;
    }
  }
  return best;
}

// Small cost perturbation on boxed structurals. Almost every column has
// zero cost, so without it the dual simplex makes long runs of zero-length
// steps. Signs follow the current nonbasic position to keep dual
// feasibility.
void DualSimplex::Impl::perturb_costs() {
  cost_ = base_cost_;
  perturbation_slack_ = 0.0;
  if (opt_.perturbation <= 0.0) return;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  for (int j = 0; j < n_; ++j) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (is_fixed(j) || artificial_[j] || !std::isfinite(lower_[j]) ||
        !std::isfinite(upper_[j])) {
      continue;
    }
    const double delta =
        opt_.perturbation * (1.0 + u) * (1.0 + std::abs(base_cost_[j]));
    const double sign = status_[j] == kAtUpper ? -1.0 : 1.0;
    cost_[j] += sign * delta;
    perturbation_slack_ +=
        delta * std::max(std::abs(lower_[j]), std::abs(upper_[j]));
  }
}

void DualSimplex::Impl::load_column(int q, Eigen::VectorXd& column) const {
  column.setZero();
  if (q < n_) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, q); it; ++it) {
      column[it.row()] = it.value();
    }
  } else {
    column[q - n_] = -1.0;
  }
  ftran(column);
}

void DualSimplex::Impl::push_eta(int r, const Eigen::VectorXd& column) {
  Eta eta;
  eta.row = r;
  eta.pivot = column[r];
  for (int i = 0; i < m_; ++i) {
    if (i != r && std::abs(column[i]) > kDropTolerance) {
      eta.index.push_back(i);
      eta.value.push_back(column[i]);
    }
  }
  etas_.push_back(std::move(eta));
}

double DualSimplex::Impl::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    worst = std::max({worst, lower_[j] - x_[j], x_[j] - upper_[j]});
  }
  return worst;
}

LpStatus DualSimplex::Impl::solve() {
  if (conflicts_ > 0) return LpStatus::kInfeasible;
  if (!has_basis_) slack_basis();
  int restarts = 0;
  while (!refactor()) {
    if (++restarts > 2) return LpStatus::kNumericalFailure;
    slack_basis();
  }
  compute_dual();
  for (int j = 0; j < total(); ++j) {
    if (status_[j] != kBasic) place_nonbasic(j, d_[j]);
  }
  perturb_costs();
  recompute();
  LpStatus status = dual_phase();
  // Back to the true costs; whatever dual infeasibility that leaves is
  // removed by primal pivots, then any primal drift by dual ones.
  for (int round = 0; status == LpStatus::kOptimal; ++round) {
    cost_ = base_cost_;
    perturbation_slack_ = 0.0;
    status = primal_phase();
    if (status != LpStatus::kOptimal ||
        max_primal_infeasibility() <= opt_.primal_tolerance) {
      break;
    }
    if (round == 3) return LpStatus::kNumericalFailure;
    recompute();
    status = dual_phase();
  }
  cost_ = base_cost_;
  perturbation_slack_ = 0.0;
  if (status == LpStatus::kOptimal) {
    for (int j = 0; j < n_; ++j) {
      if (artificial_[j] && status_[j] != kBasic) return LpStatus::kUnbounded;
    }
  }
  return status;
}

LpStatus DualSimplex::Impl::dual_phase() {
  const long start_iterations = iterations_;
  bool fresh = true;
  bool bland = false;
  int degenerate_run = 0;
  int trouble = 0;
  Eigen::VectorXd rho(m_);
  Eigen::VectorXd column(m_);
  Eigen::VectorXd tau(m_);

  auto refresh = [&]() -> bool {
    int attempts = 0;
    while (!refactor()) {
      if (++attempts > 2) return false;
      slack_basis();
    }
    recompute();
    fresh = true;
    return true;
  };

  for (;;) {
    const long done = iterations_ - start_iterations;
    if (opt_.iteration_limit >= 0 && done >= opt_.iteration_limit) {
      return LpStatus::kIterationLimit;
    }
    if (opt_.deadline && (done & 31) == 0 &&
        std::chrono::steady_clock::now() > *opt_.deadline) {
      return LpStatus::kTimeLimit;
    }
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      if (!refresh()) return LpStatus::kNumericalFailure;
    }
    if (std::isfinite(opt_.cutoff) && (done & 15) == 0 &&
        std::none_of(artificial_.begin(), artificial_.end(),
                     [](char c) { return c != 0; }) &&
        working_objective() - perturbation_slack_ > opt_.cutoff) {
      return LpStatus::kCutoff;
    }

    const int r = choose_leaving(bland);
    if (r < 0) {
      if (!fresh) {
        if (!refresh()) return LpStatus::kNumericalFailure;
        continue;
      }
      return LpStatus::kOptimal;
    }

    const int leaving = head_[r];
    const int sigma = x_[leaving] < lower_[leaving] ? -1 : +1;
    const double target = sigma < 0 ? lower_[leaving] : upper_[leaving];

    rho.setZero();
    rho[r] = 1.0;
    btran(rho);
    compute_pivot_row(rho);

    const int q = ratio_test(sigma, bland);
    if (q < 0) {
      if (!fresh) {
        if (!refresh()) return LpStatus::kNumericalFailure;
        continue;
      }
      return LpStatus::kInfeasible;
    }

    load_column(q, column);
    const double pivot = column[r];
    if (std::abs(pivot - alpha_[q]) > 1e-8 * (1.0 + std::abs(pivot)) ||
        std::abs(pivot) < 1e-11) {
      if (++trouble > 5) return LpStatus::kNumericalFailure;
      if (!refresh()) return LpStatus::kNumericalFailure;
      continue;
    }

    tau = rho;
    ftran(tau);

    // Dual step.
    double theta_d = d_[q] / alpha_[q];
    const bool wrong_sign = (status_[q] == kAtLower && d_[q] < 0) ||
                            (status_[q] == kAtUpper && d_[q] > 0);
    if (wrong_sign) {
      cost_[q] -= d_[q];
      d_[q] = 0.0;
      theta_d = 0.0;
    }
    if (theta_d != 0.0) {
      for (int j : touched_) d_[j] -= theta_d * alpha_[j];
    }
    d_[q] = 0.0;
    d_[leaving] = -theta_d;

    if (std::abs(theta_d) <= 1e-12) {
      if (++degenerate_run > kDegenerateRunLimit) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }

    // Primal step.
    const double theta_p = (x_[leaving] - target) / pivot;
    for (int i = 0; i < m_; ++i) {
      if (column[i] != 0.0) x_[head_[i]] -= theta_p * column[i];
    }
    x_[q] += theta_p;
    x_[leaving] = target;

    // Dual steepest-edge weights.
    const double w_r = std::max(rho.squaredNorm(), kMinWeight);
    for (int i = 0; i < m_; ++i) {
      if (i == r || column[i] == 0.0) continue;
      const double ratio = column[i] / pivot;
      weight_[i] = std::max(
          weight_[i] + ratio * (ratio * w_r - 2.0 * tau[i]), kMinWeight);
    }
    weight_[r] = std::max(w_r / (pivot * pivot), kMinWeight);

    head_[r] = q;
    status_[q] = kBasic;
    status_[leaving] = sigma < 0 ? kAtLower : kAtUpper;

    push_eta(r, column);
    ++iterations_;
    fresh = false;
  }
}

// Primal simplex from a primal feasible basis; used to clean up after the
// perturbed dual phase. Dantzig pricing, two-pass ratio test, bound flips
// for boxed entering variables.
LpStatus DualSimplex::Impl::primal_phase() {
  const double dtol = opt_.dual_tolerance;
  const double ptol = opt_.primal_tolerance;
  const double piv = opt_.pivot_tolerance;
  const long start_iterations = iterations_;
  Eigen::VectorXd column(m_);
  Eigen::VectorXd rho(m_);
  bool bland = false;
  bool pivoted = false;
  int degenerate_run = 0;
  int trouble = 0;
  compute_dual();

  for (;;) {
    const long done = iterations_ - start_iterations;
    if (opt_.iteration_limit >= 0 && done >= opt_.iteration_limit) {
      return LpStatus::kIterationLimit;
    }
    if (opt_.deadline && (done & 31) == 0 &&
        std::chrono::steady_clock::now() > *opt_.deadline) {
      return LpStatus::kTimeLimit;
    }
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      if (!refactor()) return LpStatus::kNumericalFailure;
      compute_primal();
      compute_dual();
    }

    int q = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < total(); ++j) {
      if (status_[j] == kBasic || is_fixed(j)) continue;
      const double dj = d_[j];
      int want = 0;
      if (status_[j] == kAtLower && dj < -dtol) {
        want = 1;
      } else if (status_[j] == kAtUpper && dj > dtol) {
        want = -1;
      } else if (status_[j] == kAtZero && std::abs(dj) > dtol) {
        want = dj < 0 ? 1 : -1;
      }
      if (want == 0) continue;
      if (bland) {
        q = j;
        dir = want;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        q = j;
        dir = want;
      }
    }
    if (q < 0) {
      if (pivoted) weight_.assign(m_, 1.0);
      return LpStatus::kOptimal;
    }

    load_column(q, column);
    // Basic values move by -theta * dir * column.
    double bound = kInf;
    for (int i = 0; i < m_; ++i) {
      const double a = dir * column[i];
      if (std::abs(a) < piv) continue;
      const int j = head_[i];
      if (a > 0 && std::isfinite(lower_[j])) {
        bound = std::min(bound, (x_[j] - lower_[j] + ptol) / a);
      } else if (a < 0 && std::isfinite(upper_[j])) {
        bound = std::min(bound, (upper_[j] - x_[j] + ptol) / -a);
      }
    }
    const double flip = upper_[q] - lower_[q];
    if (bound == kInf && !std::isfinite(flip)) return LpStatus::kUnbounded;

    int r = -1;
    double theta = kInf;
    double best_alpha = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = dir * column[i];
      if (std::abs(a) < piv) continue;
      const int j = head_[i];
      double ratio = kInf;
      if (a > 0 && std::isfinite(lower_[j])) {
        ratio = (x_[j] - lower_[j]) / a;
      } else if (a < 0 && std::isfinite(upper_[j])) {
        ratio = (upper_[j] - x_[j]) / -a;
      }
      if (ratio > bound) continue;
      if (bland) {
        if (ratio < theta || (ratio == theta && j < head_[r])) {
          theta = ratio;
          r = i;
        }
      } else if (std::abs(a) > best_alpha) {
        best_alpha = std::abs(a);
        theta = ratio;
        r = i;
      }
    }
    theta = std::max(theta, 0.0);

    if (r < 0 || flip <= theta) {
      for (int i = 0; i < m_; ++i) {
        if (column[i] != 0.0) x_[head_[i]] -= flip * dir * column[i];
      }
      status_[q] = status_[q] == kAtLower ? kAtUpper : kAtLower;
      x_[q] = status_[q] == kAtLower ? lower_[q] : upper_[q];
      continue;
    }

    const int leaving = head_[r];
    const bool to_lower = dir * column[r] > 0;
    rho.setZero();
    rho[r] = 1.0;
    btran(rho);
    compute_pivot_row(rho);
    const double pivot = column[r];
    if (std::abs(pivot - alpha_[q]) > 1e-8 * (1.0 + std::abs(pivot))) {
      if (++trouble > 5 || !refactor()) return LpStatus::kNumericalFailure;
      compute_primal();
      compute_dual();
      continue;
    }

    for (int i = 0; i < m_; ++i) {
      if (column[i] != 0.0) x_[head_[i]] -= theta * dir * column[i];
    }
    x_[q] += theta * dir;
    x_[leaving] = to_lower ? lower_[leaving] : upper_[leaving];

    const double theta_d = d_[q] / pivot;
    for (int j : touched_) d_[j] -= theta_d * alpha_[j];
    d_[q] = 0.0;
    d_[leaving] = -theta_d;

    head_[r] = q;
    status_[q] = kBasic;
    status_[leaving] = to_lower ? kAtLower : kAtUpper;
    push_eta(r, column);
    ++iterations_;
    pivoted = true;
    if (theta <= 1e-12) {
      if (++degenerate_run > kDegenerateRunLimit) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

Eigen::VectorXd DualSimplex::Impl::values() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(working_of_.size()));
  for (std::size_t j = 0; j < working_of_.size(); ++j) {
    const int w = working_of_[j];
    out[static_cast<Eigen::Index>(j)] =
        w < 0 ? removed_value_[j] : (x_.empty() ? 0.0 : x_[w]);
  }
  return out;
}

double DualSimplex::Impl::objective() const {
  double obj = cost_offset_;
  if (x_.empty()) return obj;
  for (int j = 0; j < n_; ++j) obj += base_cost_[j] * x_[j];
  return obj;
}

DualSimplex::DualSimplex(const MilpProblem& prob, LpOptions options)
    : impl_(std::make_unique<Impl>(prob, std::move(options))) {}
DualSimplex::~DualSimplex() = default;
DualSimplex::DualSimplex(DualSimplex&&) noexcept = default;
DualSimplex& DualSimplex::operator=(DualSimplex&&) noexcept = default;

void DualSimplex::set_options(const LpOptions& options) { impl_->opt_ = options; }
const LpOptions& DualSimplex::options() const { return impl_->opt_; }
void DualSimplex::set_bounds(int col, double lower, double upper) {
  impl_->set_bounds(col, lower, upper);
}
double DualSimplex::lower(int col) const { return impl_->lower(col); }
double DualSimplex::upper(int col) const { return impl_->upper(col); }
DualSimplex::Basis DualSimplex::basis() const { return impl_->basis(); }
void DualSimplex::set_basis(const Basis& basis) { impl_->set_basis(basis); }
LpStatus DualSimplex::solve() { return impl_->solve(); }
Eigen::VectorXd DualSimplex::values() const { return impl_->values(); }
double DualSimplex::objective() const { return impl_->objective(); }
long DualSimplex::iterations() const { return impl_->iterations_; }

LpResult solve_lp(const MilpProblem& prob, const LpOptions& options) {
  DualSimplex engine(prob, options);
  LpResult result;
  result.status = engine.solve();
  result.iterations = engine.iterations();
  if (result.status == LpStatus::kOptimal) {
    result.values = engine.values();
    result.objective = engine.objective();
  }
  return result;
}

}  // namespace ebus
