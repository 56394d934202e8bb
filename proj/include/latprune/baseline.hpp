// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

// Knapsack pruning baseline with per-channel latency costs.
//
// Each step prices output channel j of layer l as T_l(p, j) - T_l(p, j - 1),
// where p is the input count kept after the previous step. The price goes
// stale as soon as the predecessor shrinks in the same step, which is the
// estimation error this baseline exists to expose. Blocks are never removed.

#ifndef LATPRUNE_BASELINE_HPP_
#define LATPRUNE_BASELINE_HPP_

#include <string>
#include <vector>

#include "latprune/error.hpp"
#include "latprune/solver.hpp"

namespace latprune {

struct BaselineState {
  std::vector<int> kept;  // per layer, starts at m_l
  int step_index = 0;
  std::vector<double> budgets;
};

// Geometric interpolation from dense_ms down to final_ms:
// budgets[k] = dense * (final / dense)^((k + 1) / steps).
std::vector<double> exponential_schedule(double dense_ms, double final_ms,
                                         int steps);

BaselineState initial_baseline_state(const Problem& problem, int steps);

struct TraceRow {
  int step = 0;  // 1-based
  double budget_ms = 0.0;
  double estimated_ms = 0.0;  // priced with the stale input counts
  double true_ms = 0.0;       // bilayer latency of the new counts
  int layers_at_zero = 0;
};

// Thrown when a step leaves some layer without channels. Carries the trace
// up to and including the failing step.
class EmptyLayerError : public Error {
 public:
  EmptyLayerError(std::vector<TraceRow> trace, std::vector<int> empty_layers);

  const std::vector<TraceRow>& trace() const { return trace_; }
  const std::vector<int>& empty_layers() const { return empty_layers_; }

 private:
  std::vector<TraceRow> trace_;
  std::vector<int> empty_layers_;
};

struct StepResult {
  BaselineState state;
  TraceRow row;
};

// Knapsack over channel counts so that the estimated latency fits budget_ms.
// Counts only shrink. A budget at or above the current latency leaves the
// state unchanged. Throws EmptyLayerError if a layer drops to zero.
StepResult halp_step(const Problem& problem, const BaselineState& state,
                     double budget_ms);

// Sum over layers of T_l(c_{l-1}, c_l) with all blocks kept. Layers with zero
// channels on either side add nothing.
double baseline_true_latency(const Problem& problem, const std::vector<int>& counts);

struct BaselineResult {
  std::vector<int> channel_choice;
  double objective = 0.0;
  double latency_ms = 0.0;
  std::vector<TraceRow> trace;
};

// Runs `steps` knapsack steps along the exponential schedule ending at the
// problem budget.
BaselineResult run_halp(const Problem& problem, int steps);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace latprune

#endif  // LATPRUNE_BASELINE_HPP_
