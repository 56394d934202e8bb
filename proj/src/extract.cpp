// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "json_util.hpp"
#include "latprune/error.hpp"
#include "latprune/io.hpp"

namespace latprune {
namespace {

constexpr double kLatencyTolerance = 1e-9;

std::string layer_ref(int id) { return "layer " + std::to_string(id); }
std::string block_ref(int id) { return "block " + std::to_string(id); }

}  // namespace

PrunePlan extract_plan(const Solution& solution, const Problem& problem) {
  if (solution.status == SolveStatus::kInfeasible) {
    throw Error(ErrorCode::kInfeasibleSolution,
                "no configuration meets the budget; minimum achievable latency is " +
                    std::to_string(solution.min_latency_ms) + " ms");
  }
  const Network& net = problem.network;
  if (static_cast<int>(solution.channel_choice.size()) != net.num_layers() ||
      static_cast<int>(solution.block_active.size()) != net.num_blocks()) {
    throw Error(ErrorCode::kDimensionMismatch, "solution does not match the network");
  }
  PrunePlan plan;
  plan.budget_ms = problem.budget_ms;
  plan.predicted_latency_ms = solution.latency_ms;
  plan.objective = solution.objective;
  plan.gap = solution.gap;
  plan.solver_status = std::string(status_name(solution.status));
  plan.granularity = problem.granularity;
  for (int b = 1; b <= net.num_blocks(); ++b) {
    if (!solution.block_active[b - 1]) plan.removed_blocks.push_back(b);
  }
  // Layers of a coupling group must keep one channel set; rank it by the
  // summed scores of the group's active members.
  std::map<std::string, std::vector<int>> group_ranking;
  for (const auto& [group, members] : net.coupling_groups()) {
    std::vector<double> total(net.channels(members.front()), 0.0);
    for (int l : members) {
      if (!net.is_active(l, solution.block_active)) continue;
      const auto& s = problem.importances[l - 1].scores;
      for (std::size_t j = 0; j < total.size(); ++j) total[j] += s[j];
    }
    group_ranking[group] = rank_channels(total);
  }
  for (int l = 1; l <= net.num_layers(); ++l) {
    LayerPlan lp;
    lp.layer_id = l;
    if (!net.is_active(l, solution.block_active)) {
      lp.removed = true;
    } else {
      lp.kept_count = solution.channel_choice[l - 1];
      const auto& group = net.layer(l).coupling_group;
      if (group) {
        const auto& ranking = group_ranking.at(*group);
        if (lp.kept_count < 1 || lp.kept_count > static_cast<int>(ranking.size())) {
          throw Error(ErrorCode::kKOutOfRange,
                      layer_ref(l) + " k=" + std::to_string(lp.kept_count));
        }
        lp.kept_channel_indices.assign(ranking.begin(),
                                       ranking.begin() + lp.kept_count);
      } else {
        lp.kept_channel_indices = arg_top_k(problem.importances[l - 1], lp.kept_count);
      }
      std::sort(lp.kept_channel_indices.begin(), lp.kept_channel_indices.end());
    }
    plan.layers.push_back(std::move(lp));
  }
  return plan;
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kBudgetExceeded: return "BudgetExceeded";
    case ViolationKind::kLatencyMismatch: return "LatencyMismatch";
    case ViolationKind::kCouplingMismatch: return "CouplingMismatch";
    case ViolationKind::kBoundaryMismatch: return "BoundaryMismatch";
    case ViolationKind::kInvalidIndexSet: return "InvalidIndexSet";
    case ViolationKind::kRemovalMismatch: return "RemovalMismatch";
    case ViolationKind::kUnknownLayer: return "UnknownLayer";
    case ViolationKind::kMissingLayer: return "MissingLayer";
    case ViolationKind::kUnknownBlock: return "UnknownBlock";
  }
  return "Unknown";
}

ValidationReport validate_plan(const PrunePlan& plan, const Network& network,
                               std::span<const CostMatrix> matrices,
                               double budget_ms) {
  ValidationReport report;
  auto& out = report.violations;
  const int num_layers = network.num_layers();

  BlockDecisions z(network.num_blocks(), true);
  for (int b : plan.removed_blocks) {
    if (b < 1 || b > network.num_blocks()) {
      out.push_back({ViolationKind::kUnknownBlock, std::nullopt, b, std::nullopt, 0.0,
                     "removed " + block_ref(b) + " does not exist"});
      continue;
    }
    z[b - 1] = false;
  }

  std::vector<const LayerPlan*> by_id(num_layers + 1, nullptr);
  for (const LayerPlan& lp : plan.layers) {
    if (lp.layer_id < 1 || lp.layer_id > num_layers || by_id[lp.layer_id]) {
      out.push_back({ViolationKind::kUnknownLayer, lp.layer_id, std::nullopt,
                     std::nullopt, 0.0,
                     layer_ref(lp.layer_id) + " is unknown or listed twice"});
      continue;
    }
    by_id[lp.layer_id] = &lp;
  }

  bool counts_usable = true;
  std::vector<int> counts(num_layers, 0);
  for (int l = 1; l <= num_layers; ++l) {
    const LayerPlan* lp = by_id[l];
    if (!lp) {
      out.push_back({ViolationKind::kMissingLayer, l, std::nullopt, std::nullopt, 0.0,
                     layer_ref(l) + " is missing from the plan"});
      counts_usable = false;
      continue;
    }
    const bool active = network.is_active(l, z);
    if (lp->removed == active) {
      out.push_back({ViolationKind::kRemovalMismatch, l, network.block_of(l),
                     std::nullopt, 0.0,
                     layer_ref(l) + (active ? " is marked removed but its block is kept"
                                            : " belongs to a removed block")});
      counts_usable = false;
      continue;
    }
    const auto& idx = lp->kept_channel_indices;
    if (!active) {
      if (lp->kept_count != 0 || !idx.empty()) {
        out.push_back({ViolationKind::kInvalidIndexSet, l, std::nullopt, std::nullopt,
                       0.0, "removed " + layer_ref(l) + " must keep no channels"});
      }
      continue;
    }
    const int m = network.channels(l);
    const bool ascending = std::adjacent_find(idx.begin(), idx.end(),
                                              std::greater_equal<int>()) == idx.end();
    const bool in_range =
        !idx.empty() && idx.front() >= 1 && idx.back() <= m && ascending;
    if (lp->kept_count < 1 || lp->kept_count > m ||
        static_cast<int>(idx.size()) != lp->kept_count || !in_range) {
      out.push_back({ViolationKind::kInvalidIndexSet, l, std::nullopt, std::nullopt,
                     0.0,
                     layer_ref(l) + " needs " + std::to_string(lp->kept_count) +
                         " distinct ascending indices within 1.." + std::to_string(m)});
      counts_usable = false;
      continue;
    }
    counts[l - 1] = lp->kept_count;
  }

  // Active members of a coupling group must keep the same channels.
  std::map<std::string, int> group_first;
  for (int l = 1; l <= num_layers; ++l) {
    const auto& group = network.layer(l).coupling_group;
    if (!group || !by_id[l] || !network.is_active(l, z) || by_id[l]->removed) continue;
    auto [it, inserted] = group_first.try_emplace(*group, l);
    if (inserted) continue;
    if (by_id[l]->kept_channel_indices !=
        by_id[it->second]->kept_channel_indices) {
      out.push_back({ViolationKind::kCouplingMismatch, l, std::nullopt, *group, 0.0,
                     "group '" + *group + "': " + layer_ref(l) +
                         " keeps different channels than " + layer_ref(it->second)});
    }
  }

  // A kept block adds its output to whatever reaches its first member.
  for (const BlockSpec& b : network.spec().blocks) {
    if (!z[b.block_id - 1]) continue;
    const LayerPlan* last = by_id[b.member_layers.back()];
    if (!last || last->removed) continue;
    const int source = effective_predecessor(network, b.member_layers.front(), z);
    std::vector<int> expected;
    if (source == kNetworkInput) {
      for (int c = 1; c <= network.input_channels(); ++c) expected.push_back(c);
    } else if (by_id[source] && !by_id[source]->removed) {
      expected = by_id[source]->kept_channel_indices;
    } else {
      continue;
    }
    if (last->kept_channel_indices != expected) {
      out.push_back({ViolationKind::kBoundaryMismatch, b.member_layers.back(),
                     b.block_id, std::nullopt, 0.0,
                     block_ref(b.block_id) + " output channels differ from its skip input"});
    }
  }

  if (counts_usable) {
    const double latency = total_plan_latency(network, matrices, counts, z);
    report.recomputed_latency_ms = latency;
    if (latency > budget_ms + kLatencyTolerance) {
      out.push_back({ViolationKind::kBudgetExceeded, std::nullopt, std::nullopt,
                     std::nullopt, latency - budget_ms,
                     "latency " + std::to_string(latency) + " ms exceeds budget " +
                         std::to_string(budget_ms) + " ms by " +
                         std::to_string(latency - budget_ms) + " ms"});
    }
    if (std::abs(latency - plan.predicted_latency_ms) >
        kLatencyTolerance * std::max(1.0, std::abs(latency))) {
      out.push_back({ViolationKind::kLatencyMismatch, std::nullopt, std::nullopt,
                     std::nullopt, 0.0,
                     "plan predicts " + std::to_string(plan.predicted_latency_ms) +
                         " ms, recomputed " + std::to_string(latency) + " ms"});
    }
  }
  return report;
}

nlohmann::ordered_json plan_to_json(const PrunePlan& plan) {
  nlohmann::ordered_json j;
  j["budget_ms"] = plan.budget_ms;
  j["predicted_latency_ms"] = plan.predicted_latency_ms;
  j["objective"] = plan.objective;
  j["gap"] = plan.gap ? nlohmann::ordered_json(*plan.gap) : nlohmann::ordered_json();
  j["solver_status"] = plan.solver_status;
  j["granularity"] = plan.granularity;
  j["removed_blocks"] = plan.removed_blocks;
  auto layers = nlohmann::ordered_json::array();
  for (const LayerPlan& lp : plan.layers) {
    nlohmann::ordered_json jl;
    jl["layer_id"] = lp.layer_id;
    jl["removed"] = lp.removed;
    jl["kept_count"] = lp.kept_count;
    jl["kept_channel_indices"] = lp.kept_channel_indices;
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  return j;
}

PrunePlan plan_from_json(const nlohmann::json& doc) {
  using namespace json_util;
  expect_object(doc, "plan");
  reject_unknown_keys(doc,
                      {"budget_ms", "predicted_latency_ms", "objective", "gap",
                       "solver_status", "granularity", "removed_blocks", "layers"},
                      "plan");
  PrunePlan plan;
  plan.budget_ms = as_number(require(doc, "budget_ms", "plan"), "budget_ms");
  plan.predicted_latency_ms =
      as_number(require(doc, "predicted_latency_ms", "plan"), "predicted_latency_ms");
  plan.objective = as_number(require(doc, "objective", "plan"), "objective");
  if (const auto& g = require(doc, "gap", "plan"); !g.is_null()) {
    plan.gap = as_number(g, "gap");
  }
  plan.solver_status = as_string(require(doc, "solver_status", "plan"), "solver_status");
  plan.granularity = as_int(require(doc, "granularity", "plan"), "granularity");
  for (const auto& b : as_array(require(doc, "removed_blocks", "plan"), "removed_blocks")) {
    plan.removed_blocks.push_back(as_int(b, "removed_blocks entry"));
  }
  for (const auto& jl : as_array(require(doc, "layers", "plan"), "layers")) {
    expect_object(jl, "plan layer");
    reject_unknown_keys(jl, {"layer_id", "removed", "kept_count", "kept_channel_indices"},
                        "plan layer");
    LayerPlan lp;
    lp.layer_id = as_int(require(jl, "layer_id", "plan layer"), "layer_id");
    const auto& removed = require(jl, "removed", "plan layer");
    if (!removed.is_boolean()) {
      throw Error(ErrorCode::kParseError, "removed must be a boolean");
    }
    lp.removed = removed.get<bool>();
    lp.kept_count = as_int(require(jl, "kept_count", "plan layer"), "kept_count");
    for (const auto& i : as_array(require(jl, "kept_channel_indices", "plan layer"),
                                  "kept_channel_indices")) {
      lp.kept_channel_indices.push_back(as_int(i, "kept_channel_indices entry"));
    }
    plan.layers.push_back(std::move(lp));
  }
  return plan;
}

PrunePlan load_plan(const std::filesystem::path& path) {
  return plan_from_json(read_json_file(path));
}

}  // namespace latprune
