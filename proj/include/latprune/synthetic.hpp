// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

// Generators for offline instances: a ResNet50-shaped network, random
// importance scores, and small random problems for cross-checking solvers.

#ifndef LATPRUNE_SYNTHETIC_HPP_
#define LATPRUNE_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "latprune/importance.hpp"
#include "latprune/latency.hpp"
#include "latprune/netgraph.hpp"
#include "latprune/solver.hpp"

namespace latprune {

// 53 convolution layers: a 7x7 stem, then four stages of 3, 4, 6 and 3
// bottleneck blocks. Each stage opens with a 1x1 projection layer outside any
// block; it shares a coupling group with the last layer of every block of the
// stage, since all of them feed the same residual stream.
NetworkSpec resnet50_spec();

// Device model used with resnet50_spec in tests and examples.
DeviceModel resnet50_device();

// Log-normal channel scores. Within a stage, later blocks receive smaller
// scores, the usual pattern in trained residual networks.
std::vector<ChannelScores> random_scores(const Network& network,
                                         std::uint64_t seed);

struct RandomInstanceOptions {
  int max_layers = 6;
  int max_channels = 8;
  int max_blocks = 2;
  // Monotone tables come from a random DeviceModel; otherwise every entry is
  // drawn independently.
  bool monotone = false;
  int granularity = 1;
};

struct RandomInstance {
  NetworkSpec spec;
  std::vector<ChannelScores> scores;
  std::vector<LatencyTable> tables;
  double budget_ms = 0.0;
};

// A valid random instance. The budget is drawn between 0.7x the minimum
// achievable latency and 1.05x the dense latency, so some draws are infeasible.
RandomInstance random_instance(std::uint64_t seed,
                               const RandomInstanceOptions& options = {});

Problem to_problem(const RandomInstance& instance, int granularity = 1);

}  // namespace latprune

#endif  // LATPRUNE_SYNTHETIC_HPP_
