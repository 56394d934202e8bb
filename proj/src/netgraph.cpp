// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/netgraph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "json_util.hpp"
#include "latprune/error.hpp"
#include "latprune/io.hpp"

namespace latprune {
namespace {

std::string layer_ref(int id) { return "layer " + std::to_string(id); }
std::string block_ref(int id) { return "block " + std::to_string(id); }

}  // namespace

const LayerSpec& Network::layer(int layer_id) const {
  if (layer_id < 1 || layer_id > num_layers()) {
    throw Error(ErrorCode::kIndexOutOfRange, "no " + layer_ref(layer_id));
  }
  return spec_.layers[layer_id - 1];
}

const BlockSpec& Network::block(int block_id) const {
  if (block_id < 1 || block_id > num_blocks()) {
    throw Error(ErrorCode::kIndexOutOfRange, "no " + block_ref(block_id));
  }
  return spec_.blocks[block_id - 1];
}

int Network::channels(int layer_id) const {
  if (layer_id == kNetworkInput) return spec_.input_channels;
  return layer(layer_id).max_out_channels;
}

std::optional<int> Network::block_of(int layer_id) const {
  layer(layer_id);
  const int b = layer_block_[layer_id];
  if (b == 0) return std::nullopt;
  return b;
}

std::span<const int> Network::layers_of(int block_id) const {
  block(block_id);
  return block_layers_[block_id];
}

bool Network::is_active(int layer_id, const BlockDecisions& z) const {
  const auto b = block_of(layer_id);
  if (!b) return true;
  if (static_cast<int>(z.size()) != num_blocks()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "block decision vector has " + std::to_string(z.size()) +
                    " entries, network has " + std::to_string(num_blocks()));
  }
  return z[*b - 1];
}

Network validate_network(NetworkSpec spec) {
  if (spec.layers.empty()) {
    throw Error(ErrorCode::kInvalidNetwork, "network has no layers");
  }
  if (spec.input_channels < 1) {
    throw Error(ErrorCode::kInvalidNetwork, "input_channels must be >= 1");
  }

  const int num_layers = static_cast<int>(spec.layers.size());
  std::set<int> seen;
  for (const auto& l : spec.layers) {
    if (!seen.insert(l.layer_id).second) {
      throw Error(ErrorCode::kDuplicateLayerId, layer_ref(l.layer_id));
    }
  }
  for (int i = 0; i < num_layers; ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.layer_id != i + 1) {
      throw Error(ErrorCode::kInvalidNetwork,
                  "layer ids must be 1..L in order; position " +
                      std::to_string(i + 1) + " holds " + layer_ref(l.layer_id));
    }
    if (l.max_out_channels < 1 || l.kernel_size < 1 || l.spatial_h < 1 ||
        l.spatial_w < 1) {
      throw Error(ErrorCode::kInvalidNetwork,
                  layer_ref(l.layer_id) + " has a non-positive dimension");
    }
  }

  Network net;
  const int num_blocks = static_cast<int>(spec.blocks.size());
  net.layer_block_.assign(num_layers + 1, 0);
  net.block_layers_.assign(num_blocks + 1, {});

  std::sort(spec.blocks.begin(), spec.blocks.end(),
            [](const BlockSpec& a, const BlockSpec& b) {
              return a.block_id < b.block_id;
            });
  for (int i = 0; i < num_blocks; ++i) {
    const BlockSpec& b = spec.blocks[i];
    if (b.block_id != i + 1) {
      throw Error(ErrorCode::kInvalidNetwork,
                  "block ids must be 1..B without gaps or repeats; found " +
                      block_ref(b.block_id));
    }
    if (b.member_layers.empty()) {
      throw Error(ErrorCode::kInvalidNetwork, block_ref(b.block_id) + " is empty");
    }
    for (std::size_t k = 0; k < b.member_layers.size(); ++k) {
      const int id = b.member_layers[k];
      if (id < 1 || id > num_layers) {
        throw Error(ErrorCode::kInvalidNetwork,
                    block_ref(b.block_id) + " lists unknown " + layer_ref(id));
      }
      if (k > 0 && id != b.member_layers[k - 1] + 1) {
        throw Error(ErrorCode::kNonContiguousBlock, block_ref(b.block_id));
      }
      if (net.layer_block_[id] != 0) {
        throw Error(ErrorCode::kInvalidNetwork,
                    layer_ref(id) + " belongs to two blocks");
      }
      net.layer_block_[id] = b.block_id;
    }
    if (b.skip_source_layer != b.member_layers.front() - 1) {
      throw Error(ErrorCode::kInvalidNetwork,
                  block_ref(b.block_id) +
                      " skip_source_layer must be the layer preceding its "
                      "first member");
    }
    net.block_layers_[b.block_id] = b.member_layers;
  }
  for (const auto& l : spec.layers) {
    const int declared = l.block_id.value_or(0);
    if (declared != net.layer_block_[l.layer_id]) {
      throw Error(ErrorCode::kInvalidNetwork,
                  layer_ref(l.layer_id) + " block_id disagrees with block " +
                      "membership lists");
    }
    if (l.coupling_group) {
      if (l.coupling_group->empty()) {
        throw Error(ErrorCode::kInvalidNetwork,
                    layer_ref(l.layer_id) + " has an empty coupling_group");
      }
      net.groups_[*l.coupling_group].push_back(l.layer_id);
    }
  }
  for (const auto& [name, members] : net.groups_) {
    const int m = spec.layers[members.front() - 1].max_out_channels;
    for (int id : members) {
      if (spec.layers[id - 1].max_out_channels != m) {
        throw Error(ErrorCode::kCouplingChannelMismatch,
                    "group '" + name + "' at " + layer_ref(id));
      }
    }
  }
  for (const auto& b : spec.blocks) {
    const LayerSpec& last = spec.layers[b.member_layers.back() - 1];
    if (b.skip_source_layer == kNetworkInput) {
      // The residual add sums the block output with the raw input.
      if (last.max_out_channels != spec.input_channels) {
        throw Error(ErrorCode::kBlockBoundaryUncoupled,
                    block_ref(b.block_id) + " output width differs from input");
      }
      continue;
    }
    const LayerSpec& src = spec.layers[b.skip_source_layer - 1];
    if (!last.coupling_group || !src.coupling_group ||
        *last.coupling_group != *src.coupling_group) {
      throw Error(ErrorCode::kBlockBoundaryUncoupled,
                  block_ref(b.block_id) + ": " + layer_ref(last.layer_id) +
                      " and skip source " + layer_ref(src.layer_id) +
                      " must share a coupling_group");
    }
  }

  net.spec_ = std::move(spec);
  return net;
}

int effective_predecessor(const Network& network, int layer_id,
                          const BlockDecisions& z) {
  network.layer(layer_id);
  for (int prev = layer_id - 1; prev >= 1; --prev) {
    if (network.is_active(prev, z)) return prev;
  }
  return kNetworkInput;
}

NetworkSpec network_from_json(const nlohmann::json& doc) {
  using namespace json_util;
  expect_object(doc, "network");
  reject_unknown_keys(doc, {"input_channels", "budget_unit", "layers", "blocks"},
                      "network");
  NetworkSpec spec;
  spec.input_channels = as_int(require(doc, "input_channels", "network"),
                               "input_channels");
  if (auto it = doc.find("budget_unit"); it != doc.end()) {
    spec.budget_unit = as_string(*it, "budget_unit");
  }
  for (const auto& jl : as_array(require(doc, "layers", "network"), "layers")) {
    expect_object(jl, "layer");
    reject_unknown_keys(jl,
                        {"layer_id", "name", "max_out_channels", "kernel_size",
                         "spatial_h", "spatial_w", "block_id", "coupling_group"},
                        "layer");
    LayerSpec l;
    l.layer_id = as_int(require(jl, "layer_id", "layer"), "layer_id");
    const std::string where = layer_ref(l.layer_id);
    l.name = as_string(require(jl, "name", where), "name");
    l.max_out_channels =
        as_int(require(jl, "max_out_channels", where), "max_out_channels");
    l.kernel_size = as_int(require(jl, "kernel_size", where), "kernel_size");
    l.spatial_h = as_int(require(jl, "spatial_h", where), "spatial_h");
    l.spatial_w = as_int(require(jl, "spatial_w", where), "spatial_w");
    if (auto it = jl.find("block_id"); it != jl.end() && !it->is_null()) {
      l.block_id = as_int(*it, "block_id");
    }
    if (auto it = jl.find("coupling_group"); it != jl.end() && !it->is_null()) {
      l.coupling_group = as_string(*it, "coupling_group");
    }
    spec.layers.push_back(std::move(l));
  }
  if (auto it = doc.find("blocks"); it != doc.end()) {
    for (const auto& jb : as_array(*it, "blocks")) {
      expect_object(jb, "block");
      reject_unknown_keys(jb, {"block_id", "member_layers", "skip_source_layer"},
                          "block");
      BlockSpec b;
      b.block_id = as_int(require(jb, "block_id", "block"), "block_id");
      const std::string where = block_ref(b.block_id);
      for (const auto& m : as_array(require(jb, "member_layers", where),
                                    "member_layers")) {
        b.member_layers.push_back(as_int(m, "member_layers"));
      }
      b.skip_source_layer =
          as_int(require(jb, "skip_source_layer", where), "skip_source_layer");
      spec.blocks.push_back(std::move(b));
    }
  }
  return spec;
}

nlohmann::ordered_json network_to_json(const NetworkSpec& spec) {
  nlohmann::ordered_json doc;
  doc["input_channels"] = spec.input_channels;
  doc["budget_unit"] = spec.budget_unit;
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : spec.layers) {
    nlohmann::ordered_json jl;
    jl["layer_id"] = l.layer_id;
    jl["name"] = l.name;
    jl["max_out_channels"] = l.max_out_channels;
    jl["kernel_size"] = l.kernel_size;
    jl["spatial_h"] = l.spatial_h;
    jl["spatial_w"] = l.spatial_w;
    if (l.block_id) jl["block_id"] = *l.block_id;
    if (l.coupling_group) jl["coupling_group"] = *l.coupling_group;
    layers.push_back(std::move(jl));
  }
  std::vector<const BlockSpec*> blocks;
  for (const auto& b : spec.blocks) blocks.push_back(&b);
  std::sort(blocks.begin(), blocks.end(), [](const auto* a, const auto* b) {
    return a->block_id < b->block_id;
  });
  auto& jblocks = doc["blocks"] = nlohmann::ordered_json::array();
  for (const auto* b : blocks) {
    nlohmann::ordered_json jb;
    jb["block_id"] = b->block_id;
    jb["member_layers"] = b->member_layers;
    jb["skip_source_layer"] = b->skip_source_layer;
    jblocks.push_back(std::move(jb));
  }
  return doc;
}

Network load_network(const std::filesystem::path& path) {
  return validate_network(network_from_json(read_json_file(path)));
}

}  // namespace latprune
