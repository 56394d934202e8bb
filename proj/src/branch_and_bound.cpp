// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

// Best-first branch-and-bound over block decisions and channel-count ranges.
//
// Every node fixes some blocks and narrows the admissible count range of some
// decision units. Its bound is the Lagrangian dual of the single latency
// constraint,
//
//   D(lambda) = max_{y,z} sum(I - lambda * C) + lambda * budget,
//
// evaluated exactly by ChainDp. The multiplier is searched over the
// breakpoints of D: given a path above budget and one within it, the next
// multiplier is where their Lagrangian lines cross. The search stops once the
// DP finds nothing above that crossing, which is then the minimum of D.
//
// Every DP path within budget is offered as an incumbent. A node whose bound
// does not beat the incumbent is closed; otherwise it is split on a block or a
// unit where the last infeasible and feasible paths disagree, so each child
// excludes one of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "chain_dp.hpp"
#include "decision_model.hpp"
#include "latprune/error.hpp"
#include "latprune/solver.hpp"

namespace latprune {
namespace {

using detail::BlockState;
using detail::ChainDp;
using detail::ConfigEvaluator;
using detail::DecisionModel;
using detail::DpResult;
using detail::UnitDomain;
using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxMultiplierSteps = 64;
constexpr double kOptimalGap = 1e-9;

double relative_gap(double dual, double primal) {
  return (dual - primal) / std::max(dual, 1e-12);
}

struct Node {
  std::int64_t id = 0;
  double bound = kInf;
  BlockState blocks;
  std::vector<UnitDomain> domains;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

struct Path {
  std::vector<int> unit_count;
  std::vector<int> counts;
  BlockDecisions z;
  double importance = 0.0;
  double latency = 0.0;
};

class Search {
 public:
  Search(const Problem& problem, const SolveOptions& options)
      : problem_(problem),
        options_(options),
        model_(problem),
        dp_(problem, model_),
        start_(Clock::now()) {}

  Solution run();

 private:
  Path make_path(const DpResult& r) const {
    Path p;
    p.unit_count = r.unit_count;
    p.counts = model_.layer_counts(r.unit_count);
    p.z = r.z;
    const ConfigEvaluator eval(problem_, p.z);
    p.importance = eval.objective(p.counts);
    p.latency = eval.latency(p.counts);
    return p;
  }

  bool feasible(const Path& p) const { return p.latency <= problem_.budget_ms; }

  void offer(const Path& p) {
    if (!feasible(p)) return;
    Solution s;
    s.channel_choice = p.counts;
    s.block_active = p.z;
    s.objective = p.importance;
    s.latency_ms = p.latency;
    if (!incumbent_ || better_solution(s, *incumbent_)) incumbent_ = std::move(s);
  }

  void offer_warm_start(const Solution& hint);

  // A node bound this close to the incumbent cannot hide a better solution.
  bool dominated(double bound) const {
    return incumbent_ &&
           bound <= incumbent_->objective +
                        1e-12 * std::max(1.0, std::abs(incumbent_->objective));
  }

  bool out_of_time() const {
    return std::chrono::duration<double>(Clock::now() - start_).count() >=
           options_.time_limit_s;
  }

  DpResult dp(double w_importance, double w_latency, const Node& node) const {
    return dp_.run(w_importance, w_latency, node.blocks, node.domains);
  }

  void process(Node node);
  void branch(const Node& node, double bound, const Path& above, const Path& within);
  void push(Node node) {
    node.id = next_id_++;
    open_.push(std::move(node));
  }

  const Problem& problem_;
  const SolveOptions& options_;
  DecisionModel model_;
  ChainDp dp_;
  Clock::time_point start_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open_;
  std::int64_t next_id_ = 0;
  std::optional<Solution> incumbent_;
};

void Search::offer_warm_start(const Solution& hint) {
  const Network& net = problem_.network;
  if (static_cast<int>(hint.channel_choice.size()) != net.num_layers() ||
      static_cast<int>(hint.block_active.size()) != net.num_blocks()) {
    return;
  }
  Path p;
  p.unit_count.resize(model_.num_units());
  for (int u = 0; u < model_.num_units(); ++u) {
    const auto layers = model_.unit_layers(u);
    const int c = hint.channel_choice[layers.front() - 1];
    const auto allowed = model_.counts(u);
    if (std::find(allowed.begin(), allowed.end(), c) == allowed.end()) return;
    for (int l : layers) {
      if (hint.channel_choice[l - 1] != c) return;
    }
    p.unit_count[u] = c;
  }
  p.counts = hint.channel_choice;
  p.z = hint.block_active;
  const ConfigEvaluator eval(problem_, p.z);
  p.importance = eval.objective(p.counts);
  p.latency = eval.latency(p.counts);
  offer(p);
}

void Search::process(Node node) {
  const double budget = problem_.budget_ms;

  const Path fastest = make_path(dp(0.0, 1.0, node));
  if (!feasible(fastest)) return;
  offer(fastest);

  const DpResult greedy = dp(1.0, 0.0, node);
  const Path best_unconstrained = make_path(greedy);
  offer(best_unconstrained);
  if (feasible(best_unconstrained)) return;  // solved exactly

  double bound = std::min(node.bound, greedy.value);
  if (dominated(bound)) return;

  Path above = best_unconstrained;
  Path within = fastest;
  for (int step = 0; step < kMaxMultiplierSteps; ++step) {
    if (above.importance <= within.importance) {
      bound = std::min(bound, std::max(within.importance, above.importance));
      break;
    }
    const double lambda =
        (above.importance - within.importance) / (above.latency - within.latency);
    const DpResult r = dp(1.0, lambda, node);
    bound = std::min(bound, r.value + lambda * budget);
    const Path p = make_path(r);
    offer(p);
    if (dominated(bound) || out_of_time()) break;
    const double crossing = above.importance - lambda * above.latency;
    if (r.value <= crossing + 1e-12 * std::max(1.0, std::abs(crossing))) break;
    if (feasible(p)) {
      within = p;
    } else {
      above = p;
    }
  }
  if (dominated(bound)) return;
  branch(node, bound, above, within);
}

void Search::branch(const Node& node, double bound, const Path& above,
                    const Path& within) {
  const Network& net = problem_.network;
  for (int b = 0; b < net.num_blocks(); ++b) {
    if (node.blocks[b] == -1 && above.z[b] != within.z[b]) {
      Node keep{0, bound, node.blocks, node.domains};
      keep.blocks[b] = 1;
      Node drop{0, bound, node.blocks, node.domains};
      drop.blocks[b] = 0;
      push(std::move(keep));
      push(std::move(drop));
      return;
    }
  }

  auto index_of = [&](int u, int count) {
    const auto allowed = model_.counts(u);
    return static_cast<int>(std::lower_bound(allowed.begin(), allowed.end(), count) -
                            allowed.begin());
  };
  auto unit_matters = [&](int u) {
    for (int l : model_.unit_layers(u)) {
      if (net.is_active(l, above.z) || net.is_active(l, within.z)) return true;
    }
    return false;
  };
  int best_unit = -1;
  int best_spread = 0;
  for (int u = 0; u < model_.num_units(); ++u) {
    if (node.domains[u].size() < 2 || !unit_matters(u)) continue;
    const int spread = std::abs(index_of(u, above.unit_count[u]) -
                                index_of(u, within.unit_count[u]));
    if (spread > best_spread) {
      best_spread = spread;
      best_unit = u;
    }
  }
  if (best_unit >= 0) {
    const int split = std::min(index_of(best_unit, above.unit_count[best_unit]),
                               index_of(best_unit, within.unit_count[best_unit]));
    Node upper{0, bound, node.blocks, node.domains};
    upper.domains[best_unit].lo = split + 1;
    Node lower{0, bound, node.blocks, node.domains};
    lower.domains[best_unit].hi = split;
    push(std::move(upper));
    push(std::move(lower));
    return;
  }

  // The two paths always differ somewhere that matters; fall back to any
  // undecided block so the search still terminates.
  for (int b = 0; b < net.num_blocks(); ++b) {
    if (node.blocks[b] == -1) {
      Node keep{0, bound, node.blocks, node.domains};
      keep.blocks[b] = 1;
      Node drop{0, bound, node.blocks, node.domains};
      drop.blocks[b] = 0;
      push(std::move(keep));
      push(std::move(drop));
      return;
    }
  }
}

Solution Search::run() {
  Node root;
  root.blocks.assign(problem_.network.num_blocks(), -1);
  root.domains.resize(model_.num_units());
  for (int u = 0; u < model_.num_units(); ++u) {
    root.domains[u] = {0, static_cast<int>(model_.counts(u).size()) - 1};
  }
  const Path fastest = make_path(dp(0.0, 1.0, root));
  if (options_.warm_start) offer_warm_start(*options_.warm_start);
  if (fastest.latency <= problem_.budget_ms) push(std::move(root));

  std::int64_t nodes = 0;
  Termination termination = Termination::kExhausted;
  while (!open_.empty()) {
    if (incumbent_) {
      const double dual = std::max(incumbent_->objective, open_.top().bound);
      if (relative_gap(dual, incumbent_->objective) <= options_.target_gap) {
        termination = Termination::kGapReached;
        break;
      }
    }
    if (nodes >= options_.node_limit) {
      termination = Termination::kNodeLimit;
      break;
    }
    if (out_of_time()) {
      termination = Termination::kTimeLimit;
      break;
    }
    Node node = open_.top();
    open_.pop();
    if (dominated(node.bound)) continue;
    ++nodes;
    process(std::move(node));
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start_).count();

  if (!incumbent_) {
    if (termination == Termination::kTimeLimit) {
      throw Error(ErrorCode::kTimeLimitReached, "no configuration within budget found");
    }
    if (termination == Termination::kNodeLimit) {
      throw Error(ErrorCode::kNodeLimitReached, "no configuration within budget found");
    }
    Solution out;
    out.channel_choice = fastest.counts;
    out.block_active = fastest.z;
    out.latency_ms = fastest.latency;
    out.min_latency_ms = fastest.latency;
    out.status = SolveStatus::kInfeasible;
    out.termination = termination;
    out.nodes = nodes;
    out.seconds = elapsed;
    return out;
  }

  Solution out = std::move(*incumbent_);
  double dual = out.objective;
  if (!open_.empty()) dual = std::max(dual, open_.top().bound);
  out.dual_bound = dual;
  out.gap = std::max(0.0, relative_gap(dual, out.objective));
  out.status = out.gap <= kOptimalGap ? SolveStatus::kOptimal : SolveStatus::kFeasible;
  out.termination = termination;
  out.min_latency_ms = fastest.latency;
  out.nodes = nodes;
  out.seconds = elapsed;
  return out;
}

}  // namespace

Solution solve(const Problem& problem, const SolveOptions& options) {
  return Search(problem, options).run();
}

}  // namespace latprune
