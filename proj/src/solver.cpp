// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "chain_dp.hpp"
#include "decision_model.hpp"
#include "latprune/error.hpp"

namespace latprune {

using detail::BlockState;
using detail::ChainDp;
using detail::ConfigEvaluator;
using detail::DecisionModel;
using detail::UnitDomain;

Problem make_problem(Network network, std::vector<LayerImportance> importances,
                     std::vector<CostMatrix> matrices, double budget_ms,
                     int granularity) {
  const int num_layers = network.num_layers();
  if (static_cast<int>(importances.size()) != num_layers) {
    throw Error(ErrorCode::kInvalidProblem,
                "expected one importance vector per layer");
  }
  if (static_cast<int>(matrices.size()) != num_layers) {
    throw Error(ErrorCode::kInvalidProblem, "expected one cost matrix per layer");
  }
  for (int l = 1; l <= num_layers; ++l) {
    const auto& imp = importances[l - 1];
    if (imp.layer_id != l || imp.channels() != network.channels(l)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "importance vector of layer " + std::to_string(l) +
                      " does not match the network");
    }
    const auto& c = matrices[l - 1];
    if (c.rows() != network.channels(l - 1) || c.cols() != network.channels(l)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "cost matrix of layer " + std::to_string(l) + " is " +
                      std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                      ", expected " + std::to_string(network.channels(l - 1)) +
                      "x" + std::to_string(network.channels(l)));
    }
  }
  if (!std::isfinite(budget_ms) || budget_ms < 0.0) {
    throw Error(ErrorCode::kInvalidProblem, "budget must be finite and >= 0");
  }
  if (granularity < 1) {
    throw Error(ErrorCode::kInvalidProblem, "granularity must be >= 1");
  }
  return Problem{std::move(network), std::move(importances), std::move(matrices),
                 budget_ms, granularity};
}

double budget_from_ratio(const Network& network,
                         std::span<const CostMatrix> matrices, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidBudget, "pruning ratio must lie in (0, 1)");
  }
  return (1.0 - ratio) * dense_latency(network, matrices);
}

std::vector<int> allowed_counts(int max_channels, int granularity) {
  std::vector<int> out;
  for (int c = granularity; c < max_channels; c += granularity) out.push_back(c);
  out.push_back(max_channels);
  return out;
}

std::string_view status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kFeasible: return "Feasible";
    case SolveStatus::kInfeasible: return "Infeasible";
  }
  return "Unknown";
}

std::string_view termination_name(Termination termination) {
  switch (termination) {
    case Termination::kExhausted: return "Exhausted";
    case Termination::kGapReached: return "GapReached";
    case Termination::kTimeLimit: return "TimeLimit";
    case Termination::kNodeLimit: return "NodeLimit";
  }
  return "Unknown";
}

double plan_objective(const Problem& problem, std::span<const int> counts,
                      const BlockDecisions& z) {
  return ConfigEvaluator(problem, z).objective(counts);
}

bool better_solution(const Solution& a, const Solution& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
  if (a.block_active != b.block_active) return a.block_active < b.block_active;
  return a.channel_choice < b.channel_choice;
}

Solution solve_exact(const Problem& problem, const ExactOptions& options) {
  const DecisionModel model(problem);
  const Network& net = problem.network;
  const int num_blocks = net.num_blocks();

  double states = std::ldexp(1.0, num_blocks);
  for (int u = 0; u < model.num_units(); ++u) {
    states *= static_cast<double>(model.counts(u).size());
  }
  if (states > options.enumeration_cap) {
    throw Error(ErrorCode::kEnumerationCapExceeded,
                std::to_string(states) + " states exceed the cap of " +
                    std::to_string(options.enumeration_cap));
  }

  std::optional<Solution> best;
  Solution fastest;
  fastest.latency_ms = std::numeric_limits<double>::infinity();

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << num_blocks); ++mask) {
    BlockDecisions z(num_blocks);
    for (int b = 0; b < num_blocks; ++b) z[b] = (mask >> b) & 1u;
    const ConfigEvaluator eval(problem, z);

    std::vector<int> relevant;
    for (int u = 0; u < model.num_units(); ++u) {
      for (int l : model.unit_layers(u)) {
        if (net.is_active(l, z)) {
          relevant.push_back(u);
          break;
        }
      }
    }
    std::vector<int> unit_count(model.num_units());
    for (int u = 0; u < model.num_units(); ++u) {
      unit_count[u] = model.counts(u).back();
    }
    std::vector<int> counts = model.layer_counts(unit_count);
    std::vector<std::size_t> digit(relevant.size(), 0);
    auto set_unit = [&](int u, int c) {
      for (int l : model.unit_layers(u)) counts[l - 1] = c;
    };
    for (std::size_t i = 0; i < relevant.size(); ++i) {
      set_unit(relevant[i], model.counts(relevant[i])[0]);
    }

    while (true) {
      const double latency = eval.latency(counts);
      const bool feasible = latency <= problem.budget_ms;
      const double objective =
          feasible || latency < fastest.latency_ms ? eval.objective(counts) : 0.0;
      if (latency < fastest.latency_ms ||
          (feasible && (!best || objective >= best->objective))) {
        Solution s;
        s.latency_ms = latency;
        s.objective = objective;
        s.channel_choice = counts;
        s.block_active = z;
        if (latency < fastest.latency_ms) fastest = s;
        if (feasible && (!best || better_solution(s, *best))) best = std::move(s);
      }
      std::size_t i = 0;
      for (; i < relevant.size(); ++i) {
        const int u = relevant[i];
        if (++digit[i] < model.counts(u).size()) {
          set_unit(u, model.counts(u)[digit[i]]);
          break;
        }
        digit[i] = 0;
        set_unit(u, model.counts(u)[0]);
      }
      if (i == relevant.size()) break;
    }
  }

  Solution out;
  if (best) {
    out = std::move(*best);
    out.status = SolveStatus::kOptimal;
    out.dual_bound = out.objective;
    out.gap = 0.0;
  } else {
    out = fastest;
    out.status = SolveStatus::kInfeasible;
    out.objective = 0.0;
    out.dual_bound = 0.0;
    out.gap = 0.0;
  }
  out.termination = Termination::kExhausted;
  out.min_latency_ms = fastest.latency_ms;
  return out;
}

namespace {

std::vector<UnitDomain> full_domains(const DecisionModel& model) {
  std::vector<UnitDomain> d(model.num_units());
  for (int u = 0; u < model.num_units(); ++u) {
    d[u] = {0, static_cast<int>(model.counts(u).size()) - 1};
  }
  return d;
}

BlockState fixed_blocks(const Network& net, const BlockDecisions& z) {
  if (static_cast<int>(z.size()) != net.num_blocks()) {
    throw Error(ErrorCode::kInvalidProblem,
                "block decision vector must have one entry per block");
  }
  BlockState s(z.size());
  for (std::size_t b = 0; b < z.size(); ++b) s[b] = z[b] ? 1 : 0;
  return s;
}

}  // namespace

RelaxedPath lagrangian_dp(const Problem& problem, const BlockDecisions& z,
                          double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidProblem, "lambda must be finite and >= 0");
  }
  const DecisionModel model(problem);
  const ChainDp dp(problem, model);
  const auto r = dp.run(1.0, lambda, fixed_blocks(problem.network, z),
                        full_domains(model));
  RelaxedPath path;
  path.channel_choice = model.layer_counts(r.unit_count);
  path.block_active = z;
  path.relaxed_objective = r.value;
  const ConfigEvaluator eval(problem, z);
  path.importance = eval.objective(path.channel_choice);
  path.latency_ms = eval.latency(path.channel_choice);
  return path;
}

double min_latency(const Problem& problem, const BlockDecisions& z) {
  const DecisionModel model(problem);
  const ChainDp dp(problem, model);
  const auto r =
      dp.run(0.0, 1.0, fixed_blocks(problem.network, z), full_domains(model));
  return ConfigEvaluator(problem, z).latency(model.layer_counts(r.unit_count));
}

double min_achievable_latency(const Problem& problem) {
  const DecisionModel model(problem);
  const ChainDp dp(problem, model);
  const auto r = dp.run(0.0, 1.0, BlockState(problem.network.num_blocks(), -1),
                        full_domains(model));
  return ConfigEvaluator(problem, r.z).latency(model.layer_counts(r.unit_count));
}

}  // namespace latprune
