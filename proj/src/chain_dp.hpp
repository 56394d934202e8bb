// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_SRC_CHAIN_DP_HPP_
#define LATPRUNE_SRC_CHAIN_DP_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "decision_model.hpp"
#include "latprune/solver.hpp"

namespace latprune::detail {

// Inclusive index range into DecisionModel::counts(unit).
struct UnitDomain {
  int lo = 0;
  int hi = 0;
  int size() const { return hi - lo + 1; }
};

// Per block: -1 undecided, 0 removed, 1 kept.
using BlockState = std::vector<std::int8_t>;

struct DpResult {
  double value = 0.0;
  std::vector<int> unit_count;  // chosen count per unit
  BlockDecisions z;
};

// Maximizes sum over active layers of
//   w_importance * I_l[c_l] - w_latency * C_l[c_prev][c_l]
// jointly over unit counts (restricted to `domains`) and undecided blocks.
//
// Layers are eliminated in chain order. The table carried between layers is
// indexed by the counts of the units still "open" at that point: units that
// appeared already and are needed again later, either as a coupled layer or
// as the input of the next layer. Because a block's last layer shares its
// unit with the skip source, the input unit of the layer after a block is the
// same whether the block is kept or removed; removal is one more transition.
//
// Ties prefer larger counts, then kept blocks.
class ChainDp {
 public:
  ChainDp(const Problem& problem, const DecisionModel& model);

  DpResult run(double w_importance, double w_latency, const BlockState& blocks,
               std::span<const UnitDomain> domains) const;

  // Largest elimination scope the instance needs with full domains.
  double max_scope_size() const;

 private:
  struct Segment {
    int first = 0;  // layer ids, inclusive
    int last = 0;
    int block = 0;  // 0 when the layer is outside every block
  };

  const Problem* problem_;
  const DecisionModel* model_;
  std::vector<std::vector<int>> frontier_;  // open units after layer p, p=0..L
  std::vector<Segment> segments_;
};

}  // namespace latprune::detail

#endif  // LATPRUNE_SRC_CHAIN_DP_HPP_
