// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_NETGRAPH_HPP_
#define LATPRUNE_NETGRAPH_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace latprune {

// One convolution layer of a chain-of-blocks network. Layer ids are 1-based
// and contiguous; id 0 is reserved for the network input.
struct LayerSpec {
  int layer_id = 0;
  std::string name;
  int max_out_channels = 1;
  int kernel_size = 1;
  int spatial_h = 1;
  int spatial_w = 1;
  std::optional<int> block_id;
  std::optional<std::string> coupling_group;

  bool operator==(const LayerSpec&) const = default;
};

// A run of consecutive layers bypassed by one residual connection. The skip
// source is the layer right before the first member, or 0 when the block
// starts at the network input.
struct BlockSpec {
  int block_id = 0;
  std::vector<int> member_layers;
  int skip_source_layer = 0;

  bool operator==(const BlockSpec&) const = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  std::vector<BlockSpec> blocks;
  int input_channels = 1;
  std::string budget_unit = "ms";

  bool operator==(const NetworkSpec&) const = default;
};

// z: one entry per block, indexed by block_id - 1. true keeps the block.
using BlockDecisions = std::vector<bool>;

inline constexpr int kNetworkInput = 0;

// A NetworkSpec that passed validation, plus the layer2block map and its
// inverse. Immutable; safe to share between concurrent solves.
class Network {
 public:
  const NetworkSpec& spec() const { return spec_; }

  int num_layers() const { return static_cast<int>(spec_.layers.size()); }
  int num_blocks() const { return static_cast<int>(spec_.blocks.size()); }
  int input_channels() const { return spec_.input_channels; }

  const LayerSpec& layer(int layer_id) const;
  const BlockSpec& block(int block_id) const;

  // Channel count m_l; channels(0) is the input channel count m_0.
  int channels(int layer_id) const;

  // beta(l); nullopt for layers outside every block.
  std::optional<int> block_of(int layer_id) const;
  // beta^-1(b).
  std::span<const int> layers_of(int block_id) const;

  // Coupling groups keyed by name, members in layer order.
  const std::map<std::string, std::vector<int>>& coupling_groups() const {
    return groups_;
  }

  bool is_active(int layer_id, const BlockDecisions& z) const;

  BlockDecisions all_blocks_active() const {
    return BlockDecisions(spec_.blocks.size(), true);
  }

 private:
  friend Network validate_network(NetworkSpec spec);
  Network() = default;

  NetworkSpec spec_;
  std::vector<int> layer_block_;  // 0 = none, indexed by layer_id
  std::vector<std::vector<int>> block_layers_;  // indexed by block_id
  std::map<std::string, std::vector<int>> groups_;
};

// Checks every structural invariant and builds the block maps. Throws
// latprune::Error naming the offending layer or block.
Network validate_network(NetworkSpec spec);

// Nearest preceding layer that is active under z, or kNetworkInput.
int effective_predecessor(const Network& network, int layer_id,
                          const BlockDecisions& z);

NetworkSpec network_from_json(const nlohmann::json& doc);
// Canonical form: fixed key order, blocks sorted by id.
nlohmann::ordered_json network_to_json(const NetworkSpec& spec);

Network load_network(const std::filesystem::path& path);

}  // namespace latprune

#endif  // LATPRUNE_NETGRAPH_HPP_
