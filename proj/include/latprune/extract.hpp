// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_EXTRACT_HPP_
#define LATPRUNE_EXTRACT_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latprune/solver.hpp"

namespace latprune {

struct LayerPlan {
  int layer_id = 0;
  bool removed = false;
  int kept_count = 0;
  std::vector<int> kept_channel_indices;  // 1-based, ascending

  bool operator==(const LayerPlan&) const = default;
};

// Concrete pruned structure: which channels survive in every layer and which
// blocks disappear. Self-describing, so it can be audited without the solver.
struct PrunePlan {
  double budget_ms = 0.0;
  double predicted_latency_ms = 0.0;
  double objective = 0.0;
  std::optional<double> gap;  // absent for heuristic plans
  std::string solver_status;
  int granularity = 1;
  std::vector<int> removed_blocks;  // ascending
  std::vector<LayerPlan> layers;    // layer order

  bool operator==(const PrunePlan&) const = default;
};

// Keeps the top-ranked channels of every active layer. Members of removed
// blocks get no channels regardless of their entry in the solution.
// Throws InfeasibleSolution for an infeasible solution.
PrunePlan extract_plan(const Solution& solution, const Problem& problem);

enum class ViolationKind {
  kBudgetExceeded,
  kLatencyMismatch,
  kCouplingMismatch,
  kBoundaryMismatch,
  kInvalidIndexSet,
  kRemovalMismatch,
  kUnknownLayer,
  kMissingLayer,
  kUnknownBlock,
};
std::string_view violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::optional<int> layer_id;
  std::optional<int> block_id;
  std::optional<std::string> group;
  double overshoot_ms = 0.0;  // set for kBudgetExceeded
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::optional<double> recomputed_latency_ms;

  bool ok() const { return violations.empty(); }
  bool operator==(const ValidationReport&) const = default;
};

// Re-derives latency from the plan alone and checks the budget, index sets,
// block removal consistency, coupling groups and residual boundaries.
ValidationReport validate_plan(const PrunePlan& plan, const Network& network,
                               std::span<const CostMatrix> matrices,
                               double budget_ms);

nlohmann::ordered_json plan_to_json(const PrunePlan& plan);
PrunePlan plan_from_json(const nlohmann::json& doc);
PrunePlan load_plan(const std::filesystem::path& path);

}  // namespace latprune

#endif  // LATPRUNE_EXTRACT_HPP_
