// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "decision_model.hpp"

namespace latprune {
namespace {

// Budget resolution of the exact knapsack. Costs are rounded up to whole
// ticks, so a selection that fits in ticks also fits in milliseconds.
constexpr int kTicks = 4096;
constexpr long long kMaxDpCells = 1'000'000;

struct Choice {
  int count = 0;
  double cost = 0.0;   // estimated latency of the whole unit at this count
  double value = 0.0;  // importance of the whole unit at this count
};

// choice[u] indexes into options[u]; options[u][0] is always count 0.
std::vector<int> solve_knapsack_exact(const std::vector<std::vector<Choice>>& options,
                                      double budget) {
  const double tick = budget / kTicks;
  const int units = static_cast<int>(options.size());
  auto ticks_of = [&](double cost) {
    if (cost <= 0.0) return 0;
    if (tick <= 0.0) return kTicks + 1;
    const double t = std::ceil(cost / tick);
    return t > kTicks ? kTicks + 1 : static_cast<int>(t);
  };
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> best(kTicks + 1, 0.0);
  std::vector<std::vector<int>> pick(units, std::vector<int>(kTicks + 1, 0));
  for (int u = 0; u < units; ++u) {
    std::vector<double> next(kTicks + 1, kNegInf);
    for (int c = 0; c < static_cast<int>(options[u].size()); ++c) {
      const int w = ticks_of(options[u][c].cost);
      if (w > kTicks) continue;
      for (int t = w; t <= kTicks; ++t) {
        const double v = best[t - w] + options[u][c].value;
        if (v >= next[t]) {  // later choices hold larger counts
          next[t] = v;
          pick[u][t] = c;
        }
      }
    }
    best = std::move(next);
  }
  std::vector<int> choice(units, 0);
  int t = kTicks;
  for (int u = units - 1; u >= 0; --u) {
    choice[u] = pick[u][t];
    t -= ticks_of(options[u][choice[u]].cost);
  }
  return choice;
}

// Repeatedly applies the upgrade with the best value per unit of cost that
// still fits, starting from nothing kept.
std::vector<int> solve_knapsack_greedy(const std::vector<std::vector<Choice>>& options,
                                       double budget) {
  const int units = static_cast<int>(options.size());
  std::vector<int> choice(units, 0);
  double used = 0.0;
  while (true) {
    int best_u = -1;
    int best_c = -1;
    double best_ratio = -std::numeric_limits<double>::infinity();
    for (int u = 0; u < units; ++u) {
      const Choice& cur = options[u][choice[u]];
      for (int c = choice[u] + 1; c < static_cast<int>(options[u].size()); ++c) {
        const Choice& up = options[u][c];
        const double dc = up.cost - cur.cost;
        if (used + dc > budget) continue;
        const double dv = up.value - cur.value;
        const double ratio =
            dc <= 0.0 ? std::numeric_limits<double>::infinity() : dv / dc;
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best_u = u;
          best_c = c;
        }
      }
    }
    if (best_u < 0) break;
    used += options[best_u][best_c].cost - options[best_u][choice[best_u]].cost;
    choice[best_u] = best_c;
  }
  return choice;
}

int input_count(const Problem& problem, const std::vector<int>& counts, int layer) {
  return layer == 1 ? problem.network.input_channels() : counts[layer - 2];
}

}  // namespace

EmptyLayerError::EmptyLayerError(std::vector<TraceRow> trace,
                                 std::vector<int> empty_layers)
    : Error(ErrorCode::kEmptyLayerResult,
            fmt::format("step {} left {} layer(s) without channels, first is layer {}",
                        trace.empty() ? 0 : trace.back().step, empty_layers.size(),
                        empty_layers.empty() ? 0 : empty_layers.front())),
      trace_(std::move(trace)),
      empty_layers_(std::move(empty_layers)) {}

std::vector<double> exponential_schedule(double dense_ms, double final_ms,
                                         int steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidBudget, "steps must be >= 1");
  if (!(final_ms > 0.0) || !(final_ms <= dense_ms) || !std::isfinite(dense_ms)) {
    throw Error(ErrorCode::kInvalidBudget,
                fmt::format("final budget {} must lie in (0, {}]", final_ms, dense_ms));
  }
  std::vector<double> out(steps);
  for (int k = 0; k < steps; ++k) {
    out[k] = dense_ms * std::pow(final_ms / dense_ms,
                                 static_cast<double>(k + 1) / steps);
  }
  out.back() = final_ms;
  return out;
}

BaselineState initial_baseline_state(const Problem& problem, int steps) {
  const Network& net = problem.network;
  BaselineState s;
  for (int l = 1; l <= net.num_layers(); ++l) s.kept.push_back(net.channels(l));
  s.budgets = exponential_schedule(dense_latency(net, problem.matrices),
                                   problem.budget_ms, steps);
  return s;
}

double baseline_true_latency(const Problem& problem, const std::vector<int>& counts) {
  double total = 0.0;
  for (int l = 1; l <= problem.network.num_layers(); ++l) {
    const int c_prev = input_count(problem, counts, l);
    const int c = counts[l - 1];
    if (c_prev == 0 || c == 0) continue;
    total += problem.matrices[l - 1].at(c_prev, c);
  }
  return total;
}

StepResult halp_step(const Problem& problem, const BaselineState& state,
                     double budget_ms) {
  const Network& net = problem.network;
  if (static_cast<int>(state.kept.size()) != net.num_layers()) {
    throw Error(ErrorCode::kInvalidProblem, "baseline state does not match the network");
  }
  if (!(budget_ms >= 0.0) || !std::isfinite(budget_ms)) {
    throw Error(ErrorCode::kInvalidBudget, "step budget must be finite and >= 0");
  }
  StepResult out;
  out.state = state;
  out.state.step_index = state.step_index + 1;
  out.row.step = out.state.step_index;
  out.row.budget_ms = budget_ms;

  const double current = baseline_true_latency(problem, state.kept);
  if (budget_ms >= current) {
    out.row.estimated_ms = current;
    out.row.true_ms = current;
    return out;
  }

  const detail::DecisionModel model(problem);
  std::vector<std::vector<Choice>> options(model.num_units());
  for (int u = 0; u < model.num_units(); ++u) {
    const auto layers = model.unit_layers(u);
    const int kept = state.kept[layers.front() - 1];
    options[u].push_back({0, 0.0, 0.0});
    // Running per-channel price of every layer in the unit, frozen inputs.
    std::vector<double> running(layers.size(), 0.0);
    int priced = 0;
    for (int count : model.counts(u)) {
      if (count > kept) break;
      Choice ch{count, 0.0, 0.0};
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const int l = layers[i];
        const int p = input_count(problem, state.kept, l);
        for (int j = priced + 1; j <= count; ++j) {
          running[i] += halp_channel_cost(problem.matrices[l - 1], p, j);
        }
        ch.cost += running[i];
        ch.value += problem.importances[l - 1].value(count);
      }
      priced = count;
      options[u].push_back(ch);
    }
  }

  const long long cells = static_cast<long long>(model.num_units()) * (kTicks + 1);
  const std::vector<int> choice = cells <= kMaxDpCells
                                      ? solve_knapsack_exact(options, budget_ms)
                                      : solve_knapsack_greedy(options, budget_ms);
  std::vector<int> unit_count(model.num_units());
  double estimated = 0.0;
  for (int u = 0; u < model.num_units(); ++u) {
    unit_count[u] = options[u][choice[u]].count;
    estimated += options[u][choice[u]].cost;
  }
  out.state.kept = model.layer_counts(unit_count);
  out.row.estimated_ms = estimated;
  out.row.true_ms = baseline_true_latency(problem, out.state.kept);

  std::vector<int> empty;
  for (int l = 1; l <= net.num_layers(); ++l) {
    if (out.state.kept[l - 1] == 0) empty.push_back(l);
  }
  out.row.layers_at_zero = static_cast<int>(empty.size());
  if (!empty.empty()) throw EmptyLayerError({out.row}, std::move(empty));
  return out;
}

BaselineResult run_halp(const Problem& problem, int steps) {
  BaselineState state = initial_baseline_state(problem, steps);
  BaselineResult result;
  for (int k = 0; k < steps; ++k) {
    try {
      StepResult r = halp_step(problem, state, state.budgets[k]);
      state = std::move(r.state);
      result.trace.push_back(r.row);
    } catch (const EmptyLayerError& e) {
      auto trace = result.trace;
      trace.insert(trace.end(), e.trace().begin(), e.trace().end());
      throw EmptyLayerError(std::move(trace), e.empty_layers());
    }
  }
  result.channel_choice = state.kept;
  result.latency_ms = baseline_true_latency(problem, state.kept);
  result.objective = plan_objective(problem, state.kept,
                                    BlockDecisions(problem.network.num_blocks(), true));
  return result;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "step,budget_ms,estimated_ms,true_ms,layers_at_zero\n";
  for (const TraceRow& r : trace) {
    out += fmt::format("{},{},{},{},{}\n", r.step, r.budget_ms, r.estimated_ms,
                       r.true_ms, r.layers_at_zero);
  }
  return out;
}

}  // namespace latprune
