// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "decision_model.hpp"

#include <map>
#include <string>

namespace latprune::detail {

DecisionModel::DecisionModel(const Problem& problem) {
  const Network& net = problem.network;
  unit_of_layer_.assign(net.num_layers(), -1);
  std::map<std::string, int> group_unit;
  for (int l = 1; l <= net.num_layers(); ++l) {
    const auto& group = net.layer(l).coupling_group;
    int unit;
    if (group) {
      auto [it, inserted] = group_unit.try_emplace(*group, num_units());
      if (inserted) unit_layers_.emplace_back();
      unit = it->second;
    } else {
      unit = num_units();
      unit_layers_.emplace_back();
    }
    unit_of_layer_[l - 1] = unit;
    unit_layers_[unit].push_back(l);
  }
  unit_counts_.resize(num_units());
  for (int u = 0; u < num_units(); ++u) {
    unit_counts_[u] =
        allowed_counts(net.channels(unit_layers_[u].front()), problem.granularity);
  }
  // A block that starts at the network input adds its output to the raw
  // input, which cannot be pruned.
  for (const auto& b : net.spec().blocks) {
    if (b.skip_source_layer == kNetworkInput) {
      unit_counts_[unit_of(b.member_layers.back())] = {net.input_channels()};
    }
  }
}

std::vector<int> DecisionModel::layer_counts(
    std::span<const int> unit_count) const {
  std::vector<int> out(unit_of_layer_.size());
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l] = unit_count[unit_of_layer_[l]];
  }
  return out;
}

ConfigEvaluator::ConfigEvaluator(const Problem& problem, const BlockDecisions& z)
    : problem_(&problem) {
  const Network& net = problem.network;
  for (int l = 1; l <= net.num_layers(); ++l) {
    if (net.is_active(l, z)) {
      active_.emplace_back(l, effective_predecessor(net, l, z));
    }
  }
}

double ConfigEvaluator::objective(std::span<const int> counts) const {
  double total = 0.0;
  for (const auto& [l, pred] : active_) {
    total += problem_->importances[l - 1].value(counts[l - 1]);
  }
  return total;
}

double ConfigEvaluator::latency(std::span<const int> counts) const {
  double total = 0.0;
  const int m0 = problem_->network.input_channels();
  for (const auto& [l, pred] : active_) {
    const int c_prev = pred == kNetworkInput ? m0 : counts[pred - 1];
    total += bilayer_latency(c_prev, counts[l - 1], problem_->matrices[l - 1]);
  }
  return total;
}

}  // namespace latprune::detail
