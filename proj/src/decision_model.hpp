// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

// Collapses coupled layers into shared decision units and evaluates complete
// configurations. Shared by the exact enumerator, the branch-and-bound solver
// and the knapsack baseline.

#ifndef LATPRUNE_SRC_DECISION_MODEL_HPP_
#define LATPRUNE_SRC_DECISION_MODEL_HPP_

#include <span>
#include <utility>
#include <vector>

#include "latprune/solver.hpp"

namespace latprune::detail {

class DecisionModel {
 public:
  explicit DecisionModel(const Problem& problem);

  int num_layers() const { return static_cast<int>(unit_of_layer_.size()); }
  int num_units() const { return static_cast<int>(unit_layers_.size()); }
  int unit_of(int layer_id) const { return unit_of_layer_[layer_id - 1]; }
  std::span<const int> unit_layers(int unit) const { return unit_layers_[unit]; }
  // Allowed counts of a unit, ascending.
  std::span<const int> counts(int unit) const { return unit_counts_[unit]; }

  // Per-layer counts from one count per unit.
  std::vector<int> layer_counts(std::span<const int> unit_count) const;

 private:
  std::vector<int> unit_of_layer_;
  std::vector<std::vector<int>> unit_layers_;
  std::vector<std::vector<int>> unit_counts_;
};

// Objective and latency of configurations under one fixed z. Sums run over
// the active layers in layer order, the same order total_plan_latency uses,
// so both agree bit for bit.
class ConfigEvaluator {
 public:
  ConfigEvaluator(const Problem& problem, const BlockDecisions& z);

  double objective(std::span<const int> counts) const;
  double latency(std::span<const int> counts) const;

 private:
  const Problem* problem_;
  // (layer_id, effective predecessor) for every active layer.
  std::vector<std::pair<int, int>> active_;
};

}  // namespace latprune::detail

#endif  // LATPRUNE_SRC_DECISION_MODEL_HPP_
