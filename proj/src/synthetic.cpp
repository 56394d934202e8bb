// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace latprune {

NetworkSpec resnet50_spec() {
  struct Stage {
    int blocks, mid, out, spatial;
  };
  constexpr Stage kStages[] = {
      {3, 64, 256, 56}, {4, 128, 512, 28}, {6, 256, 1024, 14}, {3, 512, 2048, 7}};

  NetworkSpec spec;
  spec.input_channels = 3;
  auto add_layer = [&](std::string name, int m, int k, int hw,
                       std::optional<int> block, std::optional<std::string> group) {
    LayerSpec l;
    l.layer_id = static_cast<int>(spec.layers.size()) + 1;
    l.name = std::move(name);
    l.max_out_channels = m;
    l.kernel_size = k;
    l.spatial_h = hw;
    l.spatial_w = hw;
    l.block_id = block;
    l.coupling_group = std::move(group);
    spec.layers.push_back(std::move(l));
    return spec.layers.back().layer_id;
  };

  add_layer("conv1", 64, 7, 112, std::nullopt, std::nullopt);
  int block_id = 0;
  for (int s = 0; s < 4; ++s) {
    const Stage& st = kStages[s];
    const std::string prefix = "layer" + std::to_string(s + 1);
    const std::string group = prefix + ".residual";
    int source = add_layer(prefix + ".downsample", st.out, 1, st.spatial,
                           std::nullopt, group);
    for (int b = 0; b < st.blocks; ++b) {
      ++block_id;
      const std::string base = prefix + "." + std::to_string(b);
      BlockSpec blk;
      blk.block_id = block_id;
      blk.skip_source_layer = source;
      blk.member_layers.push_back(
          add_layer(base + ".conv1", st.mid, 1, st.spatial, block_id, std::nullopt));
      blk.member_layers.push_back(
          add_layer(base + ".conv2", st.mid, 3, st.spatial, block_id, std::nullopt));
      source = add_layer(base + ".conv3", st.out, 1, st.spatial, block_id, group);
      blk.member_layers.push_back(source);
      spec.blocks.push_back(std::move(blk));
    }
  }
  return spec;
}

DeviceModel resnet50_device() {
  DeviceModel d;
  d.fixed_overhead_ms = 0.005;
  d.cost_per_mac_ms = 1e-3;
  d.tile = 8;
  return d;
}

std::vector<ChannelScores> random_scores(const Network& network,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> channel(0.0, 1.0);
  std::vector<ChannelScores> out;
  int position_in_stage = 0;
  std::optional<int> last_block;
  for (int l = 1; l <= network.num_layers(); ++l) {
    const auto block = network.block_of(l);
    if (!block) {
      position_in_stage = 0;
    } else if (block != last_block) {
      ++position_in_stage;
    }
    last_block = block;
    // Wider layers spread the same loss sensitivity over more channels.
    const double scale = std::pow(0.8, position_in_stage) * 64.0 / network.channels(l);
    ChannelScores s{l, std::vector<double>(network.channels(l))};
    for (double& v : s.scores) v = scale * channel(rng);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed,
                               const RandomInstanceOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const int num_layers = uniform_int(1, options.max_layers);

  // Blocks: disjoint contiguous ranges placed left to right.
  struct Range {
    int first, last;
  };
  std::vector<Range> ranges;
  const int wanted = uniform_int(0, options.max_blocks);
  int cursor = 1;
  for (int b = 0; b < wanted && cursor <= num_layers; ++b) {
    const int first = uniform_int(cursor, num_layers);
    const int last = uniform_int(first, std::min(num_layers, first + 2));
    ranges.push_back({first, last});
    cursor = last + 1;
  }

  // Channel counts, then equalized over every residual add: a block's last
  // layer must match its skip source, transitively.
  std::vector<int> parent(num_layers + 1);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Range& r : ranges) {
    parent[find_root(parent, r.last)] = find_root(parent, r.first - 1);
  }
  RandomInstance inst;
  inst.spec.input_channels = uniform_int(1, options.max_channels);
  std::vector<int> root_channels(num_layers + 1, 0);
  root_channels[0] = inst.spec.input_channels;
  for (int l = 1; l <= num_layers; ++l) {
    const int root = find_root(parent, l);
    if (root_channels[root] == 0) root_channels[root] = uniform_int(1, options.max_channels);
  }
  for (int l = 1; l <= num_layers; ++l) {
    const int root = find_root(parent, l);
    LayerSpec layer;
    layer.layer_id = l;
    layer.name = "conv" + std::to_string(l);
    layer.max_out_channels = root_channels[root];
    layer.kernel_size = uniform_int(0, 1) == 0 ? 1 : 3;
    layer.spatial_h = layer.spatial_w = uniform_int(1, 4);
    inst.spec.layers.push_back(std::move(layer));
  }
  // Layers tied to another layer through a residual add share a group.
  std::vector<int> members(num_layers + 1, 0);
  for (int l = 1; l <= num_layers; ++l) ++members[find_root(parent, l)];
  for (int l = 1; l <= num_layers; ++l) {
    const int root = find_root(parent, l);
    if (members[root] > 1) {
      inst.spec.layers[l - 1].coupling_group = "g" + std::to_string(root);
    }
  }
  for (std::size_t b = 0; b < ranges.size(); ++b) {
    BlockSpec blk;
    blk.block_id = static_cast<int>(b) + 1;
    blk.skip_source_layer = ranges[b].first - 1;
    for (int l = ranges[b].first; l <= ranges[b].last; ++l) {
      blk.member_layers.push_back(l);
      inst.spec.layers[l - 1].block_id = blk.block_id;
    }
    inst.spec.blocks.push_back(std::move(blk));
  }
  const Network network = validate_network(inst.spec);

  std::lognormal_distribution<double> score(0.0, 1.0);
  for (int l = 1; l <= num_layers; ++l) {
    ChannelScores s{l, std::vector<double>(network.channels(l))};
    for (double& v : s.scores) v = uniform_int(0, 9) == 0 ? 0.0 : score(rng);
    inst.scores.push_back(std::move(s));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (options.monotone) {
    DeviceModel model;
    model.fixed_overhead_ms = 0.1 * unit(rng);
    model.cost_per_mac_ms = 1e5 * (0.5 + unit(rng));
    model.tile = uniform_int(1, 3);
    inst.tables = synthesize_tables(network, model, options.granularity);
  } else {
    for (int l = 1; l <= num_layers; ++l) {
      LatencyTable t;
      t.layer_id = l;
      t.in_channels = network.channels(l - 1);
      t.out_channels = network.channels(l);
      t.granularity = options.granularity;
      t.entries.resize(static_cast<std::size_t>(t.rows()) * t.cols());
      for (double& e : t.entries) e = unit(rng);
      inst.tables.push_back(std::move(t));
    }
  }

  const auto matrices = build_cost_matrices(network, inst.tables);
  Problem probe = make_problem(network, build_importances(network, inst.scores),
                               matrices, 0.0, options.granularity);
  const double lo = min_achievable_latency(probe);
  const double hi = dense_latency(network, matrices);
  inst.budget_ms = 0.7 * lo + unit(rng) * (1.05 * hi - 0.7 * lo);
  return inst;
}

Problem to_problem(const RandomInstance& instance, int granularity) {
  Network network = validate_network(instance.spec);
  auto importances = build_importances(network, instance.scores);
  auto matrices = build_cost_matrices(network, instance.tables);
  return make_problem(std::move(network), std::move(importances),
                      std::move(matrices), instance.budget_ms, granularity);
}

}  // namespace latprune
