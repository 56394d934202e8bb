// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "chain_dp.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <string>

#include "latprune/error.hpp"

namespace latprune::detail {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kMaxScope = std::int64_t{1} << 28;

struct Table {
  std::vector<int> units;  // sorted
  std::vector<double> values;
};

// One elimination step: a table over `in_units` is extended to `scope`,
// a term is added, and everything outside `out_units` is maximized away.
struct Record {
  std::vector<int> scope;
  std::vector<int> radix;
  std::vector<std::int64_t> in_stride;  // per scope position, 0 if absent
  std::vector<std::int32_t> argmax;     // best scope index per out state
};

struct SegmentTrace {
  std::vector<Record> layers;
  Record skip;
  std::vector<std::uint8_t> took_active;
  int mode = 1;  // 1 kept, 0 removed, -1 both evaluated
};

std::vector<std::int64_t> strides_for(const std::vector<int>& radix) {
  std::vector<std::int64_t> s(radix.size(), 1);
  for (int i = static_cast<int>(radix.size()) - 2; i >= 0; --i) {
    s[i] = s[i + 1] * radix[i + 1];
  }
  return s;
}

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

int position_of(const std::vector<int>& units, int unit) {
  auto it = std::lower_bound(units.begin(), units.end(), unit);
  if (it == units.end() || *it != unit) return -1;
  return static_cast<int>(it - units.begin());
}

// Strides of `subset` units laid out inside `scope` order.
std::vector<std::int64_t> embed_strides(const std::vector<int>& scope,
                                        const std::vector<int>& subset,
                                        std::span<const UnitDomain> domains) {
  std::vector<int> sub_radix;
  for (int u : subset) sub_radix.push_back(domains[u].size());
  const auto sub_strides = strides_for(sub_radix);
  std::vector<std::int64_t> out(scope.size(), 0);
  for (std::size_t i = 0; i < scope.size(); ++i) {
    const int p = position_of(subset, scope[i]);
    if (p >= 0) out[i] = sub_strides[p];
  }
  return out;
}

// term(scope digits) = local[digit(pred) * local_cols + digit(cur)], where a
// missing position reads digit 0. With no local matrix the term is zero.
Table eliminate(const Table& in, const std::vector<int>& scope,
                const std::vector<int>& out_units,
                std::span<const UnitDomain> domains, int pos_pred, int pos_cur,
                const std::vector<double>& local, int local_cols, Record& rec) {
  rec.scope = scope;
  rec.radix.clear();
  std::int64_t scope_size = 1;
  for (int u : scope) {
    rec.radix.push_back(domains[u].size());
    scope_size *= domains[u].size();
    if (scope_size > kMaxScope) {
      throw Error(ErrorCode::kStateSpaceTooLarge,
                  "dynamic program scope exceeds " + std::to_string(kMaxScope) +
                      " states; raise the granularity");
    }
  }
  rec.in_stride = embed_strides(scope, in.units, domains);
  const auto out_stride = embed_strides(scope, out_units, domains);
  std::int64_t out_size = 1;
  for (int u : out_units) out_size *= domains[u].size();

  Table out;
  out.units = out_units;
  out.values.assign(out_size, kNegInf);
  rec.argmax.assign(out_size, -1);

  const int n = static_cast<int>(scope.size());
  std::vector<int> digit(n, 0);
  std::int64_t idx_in = 0;
  std::int64_t idx_out = 0;
  const bool has_term = !local.empty();
  for (std::int64_t s = 0; s < scope_size; ++s) {
    double v = in.values[idx_in];
    if (has_term) {
      const int kp = pos_pred >= 0 ? digit[pos_pred] : 0;
      const int kc = pos_cur >= 0 ? digit[pos_cur] : 0;
      v += local[static_cast<std::size_t>(kp) * local_cols + kc];
    }
    // Ascending sweep with >= keeps the largest digits among ties.
    if (v >= out.values[idx_out]) {
      out.values[idx_out] = v;
      rec.argmax[idx_out] = static_cast<std::int32_t>(s);
    }
    for (int i = n - 1; i >= 0; --i) {
      if (++digit[i] < rec.radix[i]) {
        idx_in += rec.in_stride[i];
        idx_out += out_stride[i];
        break;
      }
      digit[i] = 0;
      idx_in -= rec.in_stride[i] * (rec.radix[i] - 1);
      idx_out -= out_stride[i] * (rec.radix[i] - 1);
    }
  }
  return out;
}

// Decodes scope index s, records the digits, and returns the in-table index.
std::int64_t backtrack(const Record& rec, std::int64_t out_index,
                       std::vector<int>& unit_digit) {
  std::int64_t s = rec.argmax[out_index];
  assert(s >= 0);
  std::int64_t in_index = 0;
  for (int i = static_cast<int>(rec.scope.size()) - 1; i >= 0; --i) {
    const int d = static_cast<int>(s % rec.radix[i]);
    s /= rec.radix[i];
    unit_digit[rec.scope[i]] = d;
    in_index += rec.in_stride[i] * d;
  }
  return in_index;
}

}  // namespace

ChainDp::ChainDp(const Problem& problem, const DecisionModel& model)
    : problem_(&problem), model_(&model) {
  const Network& net = problem.network;
  const int num_layers = net.num_layers();
  std::vector<int> first(model.num_units(), num_layers + 1);
  std::vector<int> last_use(model.num_units(), 0);
  for (int l = 1; l <= num_layers; ++l) {
    const int u = model.unit_of(l);
    first[u] = std::min(first[u], l);
    // Used at l itself and as the input of l + 1.
    last_use[u] = std::max(last_use[u], std::min(l + 1, num_layers));
  }
  frontier_.resize(num_layers + 1);
  for (int p = 0; p <= num_layers; ++p) {
    for (int u = 0; u < model.num_units(); ++u) {
      if (first[u] <= p && p < last_use[u]) frontier_[p].push_back(u);
    }
  }
  for (int l = 1; l <= num_layers;) {
    const auto b = net.block_of(l);
    if (!b) {
      segments_.push_back({l, l, 0});
      ++l;
      continue;
    }
    const auto members = net.layers_of(*b);
    segments_.push_back({members.front(), members.back(), *b});
    l = members.back() + 1;
  }
}

double ChainDp::max_scope_size() const {
  double worst = 1.0;
  for (int l = 1; l <= model_->num_layers(); ++l) {
    auto scope = sorted_union(frontier_[l - 1], {model_->unit_of(l)});
    double size = 1.0;
    for (int u : scope) size *= static_cast<double>(model_->counts(u).size());
    worst = std::max(worst, size);
  }
  return worst;
}

DpResult ChainDp::run(double w_importance, double w_latency,
                      const BlockState& blocks,
                      std::span<const UnitDomain> domains) const {
  const Network& net = problem_->network;
  const int m0 = net.input_channels();

  auto layer_step = [&](const Table& in, int l, Record& rec) {
    const int u = model_->unit_of(l);
    const auto scope = sorted_union(in.units, {u});
    const int pos_cur = position_of(scope, u);
    int pos_pred = -1;
    int pred_size = 1;
    int pred_unit = -1;
    if (l > 1) {
      pred_unit = model_->unit_of(l - 1);
      pos_pred = position_of(scope, pred_unit);
      assert(pos_pred >= 0);
      pred_size = domains[pred_unit].size();
    }
    const UnitDomain du = domains[u];
    const auto counts_u = model_->counts(u);
    const LayerImportance& imp = problem_->importances[l - 1];
    const CostMatrix& cost = problem_->matrices[l - 1];
    std::vector<double> local(static_cast<std::size_t>(pred_size) * du.size());
    for (int kp = 0; kp < pred_size; ++kp) {
      const int c_prev = pred_unit < 0
                             ? m0
                             : model_->counts(pred_unit)[domains[pred_unit].lo + kp];
      for (int kc = 0; kc < du.size(); ++kc) {
        const int c = counts_u[du.lo + kc];
        double term = 0.0;
        if (w_importance != 0.0) term += w_importance * imp.value(c);
        if (w_latency != 0.0) term -= w_latency * cost.at(c_prev, c);
        local[static_cast<std::size_t>(kp) * du.size() + kc] = term;
      }
    }
    return eliminate(in, scope, frontier_[l], domains, pos_pred, pos_cur, local,
                     du.size(), rec);
  };

  auto skip_step = [&](const Table& in, const Segment& seg, Record& rec) {
    const auto& out_units = frontier_[seg.last];
    return eliminate(in, sorted_union(in.units, out_units), out_units, domains, -1,
                     -1, {}, 0, rec);
  };

  Table table;
  table.values = {0.0};
  std::vector<SegmentTrace> traces(segments_.size());
  for (std::size_t si = 0; si < segments_.size(); ++si) {
    const Segment& seg = segments_[si];
    SegmentTrace& trace = traces[si];
    trace.mode = seg.block == 0 ? 1 : blocks[seg.block - 1];
    if (trace.mode == 0) {
      table = skip_step(table, seg, trace.skip);
      continue;
    }
    Table kept = table;
    trace.layers.resize(seg.last - seg.first + 1);
    for (int l = seg.first; l <= seg.last; ++l) {
      kept = layer_step(kept, l, trace.layers[l - seg.first]);
    }
    if (trace.mode == 1) {
      table = std::move(kept);
      continue;
    }
    Table removed = skip_step(table, seg, trace.skip);
    assert(removed.units == kept.units);
    trace.took_active.resize(kept.values.size());
    for (std::size_t i = 0; i < kept.values.size(); ++i) {
      trace.took_active[i] = kept.values[i] >= removed.values[i];
      if (!trace.took_active[i]) kept.values[i] = removed.values[i];
    }
    table = std::move(kept);
  }
  assert(table.values.size() == 1);

  DpResult result;
  result.value = table.values[0];
  result.z.assign(net.num_blocks(), true);
  std::vector<int> unit_digit(model_->num_units(), -1);
  std::int64_t state = 0;
  for (int si = static_cast<int>(segments_.size()) - 1; si >= 0; --si) {
    const Segment& seg = segments_[si];
    const SegmentTrace& trace = traces[si];
    const bool active = trace.mode == 1 || (trace.mode == -1 && trace.took_active[state]);
    if (seg.block != 0) result.z[seg.block - 1] = active;
    if (!active) {
      state = backtrack(trace.skip, state, unit_digit);
      continue;
    }
    for (int i = static_cast<int>(trace.layers.size()) - 1; i >= 0; --i) {
      state = backtrack(trace.layers[i], state, unit_digit);
    }
  }
  result.unit_count.resize(model_->num_units());
  for (int u = 0; u < model_->num_units(); ++u) {
    // Units that only live inside removed blocks are never fixed by the
    // recursion; report their largest admissible count.
    const int d = unit_digit[u] >= 0 ? unit_digit[u] : domains[u].size() - 1;
    result.unit_count[u] = model_->counts(u)[domains[u].lo + d];
  }
  return result;
}

}  // namespace latprune::detail
