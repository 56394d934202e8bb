// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_SOLVER_HPP_
#define LATPRUNE_SOLVER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "latprune/importance.hpp"
#include "latprune/latency.hpp"
#include "latprune/netgraph.hpp"

namespace latprune {

// The joint channel/block selection problem: pick one kept-channel count per
// layer and a keep/remove decision per block so that total importance is
// maximal while the summed bilayer latency of the active layers stays within
// budget_ms. Layers of one coupling group share a single count.
struct Problem {
  Network network;
  std::vector<LayerImportance> importances;  // one per layer, layer order
  std::vector<CostMatrix> matrices;          // one per layer, layer order
  double budget_ms = 0.0;
  // Counts are restricted to multiples of granularity plus m_l itself.
  int granularity = 1;
};

// Checks that importances and matrices cover every layer with consistent
// dimensions. Throws InvalidProblem or DimensionMismatch.
Problem make_problem(Network network, std::vector<LayerImportance> importances,
                     std::vector<CostMatrix> matrices, double budget_ms,
                     int granularity = 1);

// Budget that removes `ratio` of the dense latency: (1 - ratio) * dense.
double budget_from_ratio(const Network& network,
                         std::span<const CostMatrix> matrices, double ratio);

// Ascending list of the counts a layer with m channels may keep.
std::vector<int> allowed_counts(int max_channels, int granularity);

enum class SolveStatus { kOptimal, kFeasible, kInfeasible };
std::string_view status_name(SolveStatus status);

enum class Termination {
  kExhausted,   // search tree closed; the bound is tight
  kGapReached,  // stopped at the requested relative gap
  kTimeLimit,
  kNodeLimit,
};
std::string_view termination_name(Termination termination);

struct Solution {
  // One count per layer. Entries of layers in removed blocks are present but
  // carry no meaning.
  std::vector<int> channel_choice;
  BlockDecisions block_active;
  double objective = 0.0;
  double latency_ms = 0.0;
  double dual_bound = 0.0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::kInfeasible;
  Termination termination = Termination::kExhausted;
  // Smallest latency any configuration reaches; always filled.
  double min_latency_ms = 0.0;
  std::int64_t nodes = 0;
  double seconds = 0.0;

  bool layer_ignored(const Network& network, int layer_id) const {
    return !network.is_active(layer_id, block_active);
  }
};

// Objective of a configuration: importance summed over the active layers.
double plan_objective(const Problem& problem, std::span<const int> counts,
                      const BlockDecisions& z);

// Whether `a` should be preferred over `b` among feasible configurations:
// higher objective, then lower latency, then lexicographically smaller
// (z, counts).
bool better_solution(const Solution& a, const Solution& b);

struct ExactOptions {
  double enumeration_cap = 1e7;
};

// Brute force over every block decision and every channel configuration.
// Intended as a reference for small instances.
Solution solve_exact(const Problem& problem, const ExactOptions& options = {});

struct SolveOptions {
  double time_limit_s = 60.0;
  double target_gap = 0.01;
  std::int64_t node_limit = 1'000'000;
  // A configuration to seed the incumbent with; ignored unless it meets the
  // budget of this problem.
  std::optional<Solution> warm_start;
};

// Branch-and-bound with Lagrangian bounds computed by dynamic programming
// over the layer chain. Returns the best configuration found with a certified
// upper bound. Throws TimeLimitReached or NodeLimitReached only when a limit
// hits before any feasible configuration is known.
Solution solve(const Problem& problem, const SolveOptions& options = {});

struct RelaxedPath {
  std::vector<int> channel_choice;
  BlockDecisions block_active;
  // max of sum(I_l[c_l] - lambda * C_l[c_prev][c_l]) over the active layers
  double relaxed_objective = 0.0;
  double importance = 0.0;
  double latency_ms = 0.0;
};

// Exact maximizer of the Lagrangian for fixed block decisions z.
RelaxedPath lagrangian_dp(const Problem& problem, const BlockDecisions& z,
                          double lambda);

// Smallest total latency reachable with block decisions z.
double min_latency(const Problem& problem, const BlockDecisions& z);

// Smallest total latency over every block decision.
double min_achievable_latency(const Problem& problem);

}  // namespace latprune

#endif  // LATPRUNE_SOLVER_HPP_
