// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/latency.hpp"

#include <cmath>
#include <string>

#include "json_util.hpp"
#include "latprune/error.hpp"
#include "latprune/io.hpp"

namespace latprune {
namespace {

std::string layer_ref(int id) { return "layer " + std::to_string(id); }

// T(p, j) with the convention T(p, 0) = 0.
double table_or_zero(const CostMatrix& m, int p, int j) {
  return j == 0 ? 0.0 : m.at(p, j);
}

long long padded(int count, int tile) {
  return static_cast<long long>((count + tile - 1) / tile) * tile;
}

}  // namespace

double CostMatrix::at(int in_count, int out_count) const {
  if (in_count < 1 || in_count > in_channels_ || out_count < 1 ||
      out_count > out_channels_) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "(" + std::to_string(in_count) + ", " +
                    std::to_string(out_count) + ") outside " +
                    std::to_string(in_channels_) + "x" +
                    std::to_string(out_channels_));
  }
  const int r = (in_count + granularity_ - 1) / granularity_ - 1;
  const int c = (out_count + granularity_ - 1) / granularity_ - 1;
  return grid_[static_cast<std::size_t>(r) * grid_cols_ + c];
}

CostMatrix build_cost_matrix(const LatencyTable& table) {
  const std::string where = layer_ref(table.layer_id);
  if (table.granularity < 1 || table.in_channels < 1 || table.out_channels < 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                where + " table has non-positive dimensions or granularity");
  }
  const std::size_t expected =
      static_cast<std::size_t>(table.rows()) * table.cols();
  if (table.entries.size() != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                where + " table holds " + std::to_string(table.entries.size()) +
                    " entries, expected " + std::to_string(expected));
  }
  for (double v : table.entries) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kInvalidTable,
                  where + " has a negative or non-finite entry");
    }
  }
  CostMatrix m;
  m.in_channels_ = table.in_channels;
  m.out_channels_ = table.out_channels;
  m.granularity_ = table.granularity;
  m.grid_cols_ = table.cols();
  m.grid_ = table.entries;
  return m;
}

double bilayer_latency(int c_prev, int c_cur, const CostMatrix& matrix) {
  // y_l . (y_{l-1}^T C_l) with one-hot y picks a single entry of C_l.
  return matrix.at(c_prev, c_cur);
}

double total_plan_latency(const Network& network,
                          std::span<const CostMatrix> matrices,
                          std::span<const int> counts, const BlockDecisions& z) {
  const int num_layers = network.num_layers();
  if (static_cast<int>(matrices.size()) != num_layers ||
      static_cast<int>(counts.size()) != num_layers) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected one matrix and one count per layer");
  }
  double total = 0.0;
  for (int l = 1; l <= num_layers; ++l) {
    if (!network.is_active(l, z)) continue;
    const int pred = effective_predecessor(network, l, z);
    const int c_prev =
        pred == kNetworkInput ? network.input_channels() : counts[pred - 1];
    total += bilayer_latency(c_prev, counts[l - 1], matrices[l - 1]);
  }
  return total;
}

double dense_latency(const Network& network,
                     std::span<const CostMatrix> matrices) {
  std::vector<int> full(network.num_layers());
  for (int l = 1; l <= network.num_layers(); ++l) full[l - 1] = network.channels(l);
  return total_plan_latency(network, matrices, full, network.all_blocks_active());
}

void validate_device_model(const DeviceModel& model) {
  if (!(model.fixed_overhead_ms >= 0.0) || !(model.cost_per_mac_ms > 0.0) ||
      model.tile < 1 || !std::isfinite(model.fixed_overhead_ms) ||
      !std::isfinite(model.cost_per_mac_ms)) {
    throw Error(ErrorCode::kInvalidTable,
                "device model needs overhead >= 0, cost per MAC > 0, tile >= 1");
  }
}

LatencyTable synthesize_table(const LayerSpec& layer, int prev_channels,
                              const DeviceModel& model, int granularity) {
  validate_device_model(model);
  if (granularity < 1) {
    throw Error(ErrorCode::kInvalidTable, "granularity must be >= 1");
  }
  LatencyTable t;
  t.layer_id = layer.layer_id;
  t.in_channels = prev_channels;
  t.out_channels = layer.max_out_channels;
  t.granularity = granularity;
  const double spatial = static_cast<double>(layer.kernel_size) *
                         layer.kernel_size * layer.spatial_h * layer.spatial_w;
  t.entries.reserve(static_cast<std::size_t>(t.rows()) * t.cols());
  for (int r = 1; r <= t.rows(); ++r) {
    const int i = std::min(r * granularity, t.in_channels);
    for (int c = 1; c <= t.cols(); ++c) {
      const int j = std::min(c * granularity, t.out_channels);
      const double macs =
          static_cast<double>(padded(i, model.tile) * padded(j, model.tile)) *
          spatial;
      t.entries.push_back(model.fixed_overhead_ms +
                          model.cost_per_mac_ms * macs / 1e6);
    }
  }
  return t;
}

std::vector<LatencyTable> synthesize_tables(const Network& network,
                                            const DeviceModel& model,
                                            int granularity) {
  std::vector<LatencyTable> tables;
  tables.reserve(network.num_layers());
  for (int l = 1; l <= network.num_layers(); ++l) {
    tables.push_back(synthesize_table(network.layer(l), network.channels(l - 1),
                                      model, granularity));
  }
  return tables;
}

double halp_channel_cost(const CostMatrix& matrix, int p_prev, int j) {
  if (j < 1 || j > matrix.cols()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "channel " + std::to_string(j) + " outside 1.." +
                    std::to_string(matrix.cols()));
  }
  return table_or_zero(matrix, p_prev, j) - table_or_zero(matrix, p_prev, j - 1);
}

double halp_error_bound(const CostMatrix& matrix, int p_prev, int p_hat_prev,
                        int j) {
  if (p_hat_prev > p_prev) {
    throw Error(ErrorCode::kPrecedenceViolation,
                "surviving input count " + std::to_string(p_hat_prev) +
                    " exceeds frozen count " + std::to_string(p_prev));
  }
  if (j < 1 || j > matrix.cols()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "channel " + std::to_string(j) + " outside 1.." +
                    std::to_string(matrix.cols()));
  }
  return std::abs(table_or_zero(matrix, p_prev, j - 1) -
                  table_or_zero(matrix, p_hat_prev, j - 1)) +
         std::abs(table_or_zero(matrix, p_prev, j) -
                  table_or_zero(matrix, p_hat_prev, j));
}

std::vector<LatencyTable> latency_from_json(const nlohmann::json& doc,
                                            const Network& network) {
  using namespace json_util;
  expect_object(doc, "latency file");
  reject_unknown_keys(doc, {"layers"}, "latency file");
  std::vector<LatencyTable> tables;
  for (const auto& jl : as_array(require(doc, "layers", "latency file"),
                                 "layers")) {
    expect_object(jl, "latency layer");
    reject_unknown_keys(jl, {"layer_id", "granularity", "rows", "cols", "entries"},
                        "latency layer");
    LatencyTable t;
    t.layer_id = as_int(require(jl, "layer_id", "latency layer"), "layer_id");
    const std::string where = layer_ref(t.layer_id);
    if (t.layer_id < 1 || t.layer_id > network.num_layers()) {
      throw Error(ErrorCode::kDimensionMismatch, "table for unknown " + where);
    }
    t.granularity = as_int(require(jl, "granularity", where), "granularity");
    if (t.granularity < 1) {
      throw Error(ErrorCode::kDimensionMismatch, where + " granularity must be >= 1");
    }
    t.in_channels = network.channels(t.layer_id - 1);
    t.out_channels = network.channels(t.layer_id);
    const int rows = as_int(require(jl, "rows", where), "rows");
    const int cols = as_int(require(jl, "cols", where), "cols");
    if (rows != t.rows() || cols != t.cols()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  where + " table is " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", network implies " +
                      std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    }
    const auto& jrows = as_array(require(jl, "entries", where), "entries");
    if (static_cast<int>(jrows.size()) != rows) {
      throw Error(ErrorCode::kDimensionMismatch, where + " row count mismatch");
    }
    t.entries.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& jr : jrows) {
      auto row = as_number_vector(jr, "entries");
      if (static_cast<int>(row.size()) != cols) {
        throw Error(ErrorCode::kDimensionMismatch, where + " column count mismatch");
      }
      t.entries.insert(t.entries.end(), row.begin(), row.end());
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

nlohmann::ordered_json latency_to_json(std::span<const LatencyTable> tables) {
  nlohmann::ordered_json doc;
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& t : tables) {
    nlohmann::ordered_json jl;
    jl["layer_id"] = t.layer_id;
    jl["granularity"] = t.granularity;
    jl["rows"] = t.rows();
    jl["cols"] = t.cols();
    auto& entries = jl["entries"] = nlohmann::ordered_json::array();
    for (int r = 0; r < t.rows(); ++r) {
      auto begin = t.entries.begin() + static_cast<std::ptrdiff_t>(r) * t.cols();
      entries.push_back(std::vector<double>(begin, begin + t.cols()));
    }
    layers.push_back(std::move(jl));
  }
  return doc;
}

DeviceModel device_model_from_json(const nlohmann::json& doc) {
  using namespace json_util;
  expect_object(doc, "device model");
  reject_unknown_keys(doc, {"fixed_overhead_ms", "cost_per_mac_ms", "tile"},
                      "device model");
  DeviceModel m;
  m.fixed_overhead_ms = as_number(require(doc, "fixed_overhead_ms", "device model"),
                                  "fixed_overhead_ms");
  m.cost_per_mac_ms =
      as_number(require(doc, "cost_per_mac_ms", "device model"), "cost_per_mac_ms");
  m.tile = as_int(require(doc, "tile", "device model"), "tile");
  validate_device_model(m);
  return m;
}

std::vector<CostMatrix> build_cost_matrices(const Network& network,
                                            std::span<const LatencyTable> tables) {
  std::vector<const LatencyTable*> by_layer(network.num_layers() + 1, nullptr);
  for (const auto& t : tables) {
    if (t.layer_id < 1 || t.layer_id > network.num_layers()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "table for unknown " + layer_ref(t.layer_id));
    }
    if (by_layer[t.layer_id] != nullptr) {
      throw Error(ErrorCode::kDimensionMismatch, layer_ref(t.layer_id) +
                                                     " has two tables");
    }
    by_layer[t.layer_id] = &t;
  }
  std::vector<CostMatrix> out;
  out.reserve(network.num_layers());
  for (int l = 1; l <= network.num_layers(); ++l) {
    const LatencyTable* t = by_layer[l];
    if (t == nullptr) {
      throw Error(ErrorCode::kDimensionMismatch, layer_ref(l) + " has no table");
    }
    if (t->in_channels != network.channels(l - 1) ||
        t->out_channels != network.channels(l)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  layer_ref(l) + " table dimensions disagree with the network");
    }
    out.push_back(build_cost_matrix(*t));
  }
  return out;
}

std::vector<CostMatrix> load_cost_matrices(const std::filesystem::path& path,
                                           const Network& network) {
  return build_cost_matrices(network,
                             latency_from_json(read_json_file(path), network));
}

}  // namespace latprune
