// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_LATENCY_HPP_
#define LATPRUNE_LATENCY_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "latprune/netgraph.hpp"

namespace latprune {

// Measured latency lookup for one layer, in milliseconds. Measurements are
// taken at channel counts min(k * granularity, m) for k = 1, 2, ..., so a
// table with granularity 1 is dense. entries is row-major over the measured
// grid: rows follow input channels, columns follow output channels.
struct LatencyTable {
  int layer_id = 0;
  int in_channels = 1;   // m_{l-1}
  int out_channels = 1;  // m_l
  int granularity = 1;
  std::vector<double> entries;

  int rows() const { return (in_channels + granularity - 1) / granularity; }
  int cols() const { return (out_channels + granularity - 1) / granularity; }
};

// The full in_channels x out_channels latency matrix of one layer, indexed
// 1-based by (input count, output count). Counts that were not measured read
// the next measured point up, so interpolation never under-estimates.
class CostMatrix {
 public:
  CostMatrix() = default;

  int rows() const { return in_channels_; }
  int cols() const { return out_channels_; }
  int granularity() const { return granularity_; }

  double at(int in_count, int out_count) const;

  // Latency of the unpruned layer, C(m_{l-1}, m_l).
  double dense() const { return at(in_channels_, out_channels_); }

 private:
  friend CostMatrix build_cost_matrix(const LatencyTable& table);

  int in_channels_ = 0;
  int out_channels_ = 0;
  int granularity_ = 1;
  int grid_cols_ = 0;
  std::vector<double> grid_;
};

CostMatrix build_cost_matrix(const LatencyTable& table);

// Latency of a layer keeping c_cur of its outputs while fed c_prev channels.
double bilayer_latency(int c_prev, int c_cur, const CostMatrix& matrix);

// Sum of bilayer latencies over the layers that are active under z. Each
// layer reads its input count from its effective predecessor. counts holds
// one entry per layer; entries of removed layers are ignored.
double total_plan_latency(const Network& network,
                          std::span<const CostMatrix> matrices,
                          std::span<const int> counts, const BlockDecisions& z);

// Latency of the unpruned network.
double dense_latency(const Network& network, std::span<const CostMatrix> matrices);

// Synthetic device: a fixed launch overhead plus a per-MAC cost, with channel
// counts padded up to the hardware tile.
struct DeviceModel {
  double fixed_overhead_ms = 0.0;
  double cost_per_mac_ms = 1e-6;
  int tile = 1;
};

void validate_device_model(const DeviceModel& model);

LatencyTable synthesize_table(const LayerSpec& layer, int prev_channels,
                              const DeviceModel& model, int granularity = 1);

std::vector<LatencyTable> synthesize_tables(const Network& network,
                                            const DeviceModel& model,
                                            int granularity = 1);

// Marginal cost of output channel j when the input count is frozen at p_prev:
// T(p_prev, j) - T(p_prev, j - 1), with T(p, 0) = 0. Not clamped; measured
// tables may be non-monotone.
double halp_channel_cost(const CostMatrix& matrix, int p_prev, int j);

// Upper bound on |R(p_hat_prev, j) - R(p_prev, j)|, the error made by costing
// channel j with a stale input count p_prev when p_hat_prev channels survive.
double halp_error_bound(const CostMatrix& matrix, int p_prev, int p_hat_prev,
                        int j);

std::vector<LatencyTable> latency_from_json(const nlohmann::json& doc,
                                            const Network& network);
nlohmann::ordered_json latency_to_json(std::span<const LatencyTable> tables);

DeviceModel device_model_from_json(const nlohmann::json& doc);

// One CostMatrix per layer, in layer order, checked against the network.
std::vector<CostMatrix> build_cost_matrices(const Network& network,
                                            std::span<const LatencyTable> tables);

std::vector<CostMatrix> load_cost_matrices(const std::filesystem::path& path,
                                           const Network& network);

}  // namespace latprune

#endif  // LATPRUNE_LATENCY_HPP_
