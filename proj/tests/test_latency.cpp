// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "latprune/io.hpp"
#include "latprune/latency.hpp"
#include "latprune/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace latprune {
namespace {

using testutil::matrix;

LatencyTable random_table(std::mt19937_64& rng, int rows, int cols, int g = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LatencyTable t;
  t.layer_id = 1;
  t.in_channels = rows;
  t.out_channels = cols;
  t.granularity = g;
  t.entries.resize(static_cast<std::size_t>(t.rows()) * t.cols());
  for (double& e : t.entries) e = u(rng);
  return t;
}

LayerSpec conv(int m, int k, int hw) {
  LayerSpec l = testutil::layer(1, m);
  l.kernel_size = k;
  l.spatial_h = l.spatial_w = hw;
  return l;
}

TEST(CostMatrix, DenseTableIsVerbatim) {
  const std::vector<std::vector<double>> rows = {
      {1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16}};
  const CostMatrix c = matrix(1, rows);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 4; ++j) EXPECT_EQ(c.at(i, j), rows[i - 1][j - 1]);
  }
  EXPECT_EQ(c.dense(), 16);
}

TEST(CostMatrix, GranularCeilingFill) {
  LatencyTable t;
  t.layer_id = 1;
  t.in_channels = 4;
  t.out_channels = 4;
  t.granularity = 2;
  // measured at (2,2), (2,4), (4,2), (4,4)
  t.entries = {22, 24, 42, 44};
  const CostMatrix c = build_cost_matrix(t);
  EXPECT_EQ(c.at(1, 3), 24);
  EXPECT_EQ(c.at(1, 1), 22);
  EXPECT_EQ(c.at(3, 1), 42);
  EXPECT_EQ(c.at(4, 4), 44);
}

TEST(CostMatrix, GranularFillClampsToMatrixEdge) {
  LatencyTable t;
  t.layer_id = 1;
  t.in_channels = 5;
  t.out_channels = 3;
  t.granularity = 2;
  // rows measured at 2, 4, 5; cols at 2, 3
  t.entries = {1, 2, 3, 4, 5, 6};
  const CostMatrix c = build_cost_matrix(t);
  EXPECT_EQ(c.at(5, 3), 6);
  EXPECT_EQ(c.at(5, 1), 5);
  EXPECT_EQ(c.at(3, 3), 4);
}

TEST(CostMatrix, RandomDenseLookup) {
  std::mt19937_64 rng(1);
  const LatencyTable t = random_table(rng, 17, 23);
  const CostMatrix c = build_cost_matrix(t);
  std::uniform_int_distribution<int> ri(1, 17), rj(1, 23);
  for (int k = 0; k < 100; ++k) {
    const int i = ri(rng), j = rj(rng);
    EXPECT_EQ(c.at(i, j), t.entries[(i - 1) * 23 + (j - 1)]);
  }
}

TEST(CostMatrix, Errors) {
  std::mt19937_64 rng(2);
  LatencyTable t = random_table(rng, 3, 3);
  t.entries.pop_back();
  EXPECT_ERROR_CODE(build_cost_matrix(t), kDimensionMismatch);
  t = random_table(rng, 3, 3);
  t.entries[4] = -1.0;
  EXPECT_ERROR_CODE(build_cost_matrix(t), kInvalidTable);
  t.entries[4] = std::nan("");
  EXPECT_ERROR_CODE(build_cost_matrix(t), kInvalidTable);
  const CostMatrix c = build_cost_matrix(random_table(rng, 3, 3));
  EXPECT_ERROR_CODE(c.at(0, 1), kIndexOutOfRange);
  EXPECT_ERROR_CODE(c.at(1, 4), kIndexOutOfRange);
  EXPECT_ERROR_CODE(bilayer_latency(4, 1, c), kIndexOutOfRange);
}

TEST(Bilayer, OneHotSelectsEntry) {
  const CostMatrix c = matrix(1, {{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16}});
  EXPECT_EQ(bilayer_latency(2, 3, c), 7);
  EXPECT_EQ(bilayer_latency(4, 4, c), c.dense());
}

TEST(Bilayer, MatchesDotProductOracle) {
  std::mt19937_64 rng(3);
  const CostMatrix c = build_cost_matrix(random_table(rng, 12, 9));
  std::uniform_int_distribution<int> ri(1, 12), rj(1, 9);
  for (int k = 0; k < 50; ++k) {
    const int i = ri(rng), j = rj(rng);
    EXPECT_NEAR(bilayer_latency(i, j, c), oracle::one_hot_product(c, i, j), 1e-12);
  }
}

TEST(TotalLatency, SingleBlockRemovedIsZero) {
  NetworkSpec s;
  s.input_channels = 2;
  s.layers = {testutil::layer(1, 3, 1), testutil::layer(2, 2, 1)};
  s.blocks = {{1, {1, 2}, 0}};
  const Network n = validate_network(s);
  const std::vector<CostMatrix> m = {matrix(1, {{1, 2, 3}, {4, 5, 6}}),
                                     matrix(2, {{1, 2}, {3, 4}, {5, 6}})};
  EXPECT_EQ(total_plan_latency(n, m, std::vector<int>{3, 2}, {false}), 0.0);
  EXPECT_EQ(total_plan_latency(n, m, std::vector<int>{3, 2}, {true}), 6.0 + 6.0);
}

TEST(TotalLatency, TwoLayerChain) {
  NetworkSpec s;
  s.input_channels = 2;
  s.layers = {testutil::layer(1, 3), testutil::layer(2, 2)};
  const Network n = validate_network(s);
  const std::vector<CostMatrix> m = {matrix(1, {{1, 2, 3}, {4, 5, 6}}),
                                     matrix(2, {{1, 2}, {3, 4}, {5, 6}})};
  EXPECT_EQ(total_plan_latency(n, m, std::vector<int>{2, 1}, {}), m[0].at(2, 2) + m[1].at(2, 1));
}

TEST(TotalLatency, MatchesStraightLineOracle) {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 200; ++seed) {
    RandomInstanceOptions o;
    o.max_layers = 6;
    const RandomInstance inst = random_instance(seed, o);
    const Network n = validate_network(inst.spec);
    const auto m = build_cost_matrices(n, inst.tables);
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<int> counts(n.num_layers());
      for (int l = 1; l <= n.num_layers(); ++l) {
        counts[l - 1] = std::uniform_int_distribution<int>(1, n.channels(l))(rng);
      }
      BlockDecisions z(n.num_blocks());
      for (int b = 0; b < n.num_blocks(); ++b) z[b] = rng() & 1;
      EXPECT_NEAR(total_plan_latency(n, m, counts, z),
                  oracle::eq4_latency(inst.spec, m, counts, z), 1e-12);
      ++checked;
    }
  }
}

TEST(TotalLatency, DenseConfigurationEqualsDenseLatency) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const RandomInstance inst = random_instance(seed);
    const Network n = validate_network(inst.spec);
    const auto m = build_cost_matrices(n, inst.tables);
    std::vector<int> counts;
    double corners = 0.0;
    for (int l = 1; l <= n.num_layers(); ++l) {
      counts.push_back(n.channels(l));
      corners += m[l - 1].dense();
    }
    EXPECT_NEAR(total_plan_latency(n, m, counts, n.all_blocks_active()), corners, 1e-9);
    EXPECT_NEAR(dense_latency(n, m), corners, 1e-9);
  }
}

TEST(TotalLatency, RemovingBlockNeverIncreasesOnSyntheticTables) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomInstanceOptions o;
    o.monotone = true;
    o.max_blocks = 3;
    const RandomInstance inst = random_instance(seed, o);
    const Network n = validate_network(inst.spec);
    const auto m = build_cost_matrices(n, inst.tables);
    std::vector<int> counts;
    for (int l = 1; l <= n.num_layers(); ++l) counts.push_back(n.channels(l));
    for (int mask = 0; mask < (1 << n.num_blocks()); ++mask) {
      BlockDecisions z(n.num_blocks());
      for (int b = 0; b < n.num_blocks(); ++b) z[b] = (mask >> b) & 1;
      for (int b = 0; b < n.num_blocks(); ++b) {
        if (!z[b]) continue;
        BlockDecisions fewer = z;
        fewer[b] = false;
        EXPECT_LE(total_plan_latency(n, m, counts, fewer),
                  total_plan_latency(n, m, counts, z));
      }
    }
  }
}

TEST(Synthesize, FormulaValue) {
  DeviceModel d{0.01, 1e-6, 1};
  const LatencyTable t = synthesize_table(conv(1, 1, 1), 1, d);
  ASSERT_EQ(t.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(t.entries[0], 0.01 + 1e-6 / 1e6);
}

TEST(Synthesize, ProportionalToMacsWithoutOverhead) {
  DeviceModel d{0.0, 2.0, 1};
  const LatencyTable t = synthesize_table(conv(6, 3, 5), 4, d);
  const CostMatrix c = build_cost_matrix(t);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 6; ++j) {
      EXPECT_NEAR(c.at(i, j), 2.0 * i * j * 9 * 25 / 1e6, 1e-15);
    }
  }
}

TEST(Synthesize, TileQuantization) {
  DeviceModel d{0.01, 1e-3, 8};
  const CostMatrix c = build_cost_matrix(synthesize_table(conv(16, 3, 7), 16, d));
  EXPECT_EQ(c.at(1, 1), c.at(8, 8));
  EXPECT_LT(c.at(8, 8), c.at(9, 8));
}

TEST(Synthesize, MonotoneOn32x32) {
  DeviceModel d{0.003, 5e-4, 4};
  const CostMatrix c = build_cost_matrix(synthesize_table(conv(32, 3, 14), 32, d));
  for (int i = 1; i <= 32; ++i) {
    for (int j = 1; j <= 32; ++j) {
      if (i < 32) EXPECT_LE(c.at(i, j), c.at(i + 1, j));
      if (j < 32) EXPECT_LE(c.at(i, j), c.at(i, j + 1));
    }
  }
}

TEST(Synthesize, GranularTableMatchesDenseAtMeasuredPoints) {
  DeviceModel d{0.003, 5e-4, 4};
  const LayerSpec l = conv(70, 3, 14);
  const CostMatrix dense = build_cost_matrix(synthesize_table(l, 50, d));
  const CostMatrix coarse = build_cost_matrix(synthesize_table(l, 50, d, 16));
  for (int i = 1; i <= 50; ++i) {
    for (int j = 1; j <= 70; ++j) {
      const int mi = std::min((i + 15) / 16 * 16, 50);
      const int mj = std::min((j + 15) / 16 * 16, 70);
      EXPECT_EQ(coarse.at(i, j), dense.at(mi, mj));
    }
  }
}

TEST(Synthesize, InvalidModel) {
  EXPECT_THROW(validate_device_model({0.0, 1.0, 0}), Error);
  EXPECT_THROW(validate_device_model({-1.0, 1.0, 1}), Error);
  EXPECT_THROW(validate_device_model({0.0, 0.0, 1}), Error);
}

TEST(HalpCost, BaseCaseAndStaircase) {
  DeviceModel d{0.01, 1e-3, 8};
  const CostMatrix c = build_cost_matrix(synthesize_table(conv(16, 3, 7), 16, d));
  EXPECT_EQ(halp_channel_cost(c, 8, 1), c.at(8, 1));
  EXPECT_EQ(halp_channel_cost(c, 8, 5), 0.0);
  EXPECT_GT(halp_channel_cost(c, 8, 9), 0.0);
  EXPECT_ERROR_CODE(halp_channel_cost(c, 8, 0), kIndexOutOfRange);
  EXPECT_ERROR_CODE(halp_channel_cost(c, 8, 17), kIndexOutOfRange);
}

TEST(HalpCost, NegativeOnNonMonotoneTables) {
  const CostMatrix c = matrix(1, {{3, 1}});
  EXPECT_EQ(halp_channel_cost(c, 1, 2), -2.0);
}

// Entries are multiples of 2^-10 below 2^10, so every partial sum is exact.
TEST(HalpCost, TelescopesExactlyOnDyadicTables) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> units(0, 1 << 20);
  for (int rep = 0; rep < 50; ++rep) {
    LatencyTable t = random_table(rng, 7, 40);
    for (double& e : t.entries) e = std::ldexp(units(rng), -10);
    const CostMatrix c = build_cost_matrix(t);
    for (int p = 1; p <= 7; ++p) {
      double sum = 0.0;
      for (int j = 1; j <= 40; ++j) sum += halp_channel_cost(c, p, j);
      EXPECT_EQ(sum, c.at(p, 40));
    }
  }
}

TEST(HalpCost, TelescopesOnRealTables) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const CostMatrix c = build_cost_matrix(random_table(rng, 5, 64));
    for (int p = 1; p <= 5; ++p) {
      double sum = 0.0;
      for (int j = 1; j <= 64; ++j) sum += halp_channel_cost(c, p, j);
      EXPECT_NEAR(sum, c.at(p, 64), 1e-12);
    }
  }
}

TEST(HalpBound, NoStalenessNoError) {
  std::mt19937_64 rng(8);
  const CostMatrix c = build_cost_matrix(random_table(rng, 6, 6));
  for (int j = 1; j <= 6; ++j) EXPECT_EQ(halp_error_bound(c, 4, 4, j), 0.0);
}

TEST(HalpBound, ReadsRowDifferences) {
  DeviceModel d{0.01, 1e-3, 8};
  const CostMatrix c = build_cost_matrix(synthesize_table(conv(24, 3, 7), 16, d));
  for (int j = 1; j <= 24; ++j) {
    const double prev = j == 1 ? 0.0 : std::abs(c.at(16, j - 1) - c.at(8, j - 1));
    const double cur = std::abs(c.at(16, j) - c.at(8, j));
    EXPECT_DOUBLE_EQ(halp_error_bound(c, 16, 8, j), prev + cur);
  }
}

TEST(HalpBound, PrecedenceViolation) {
  std::mt19937_64 rng(9);
  const CostMatrix c = build_cost_matrix(random_table(rng, 6, 6));
  EXPECT_ERROR_CODE(halp_error_bound(c, 3, 4, 1), kPrecedenceViolation);
}

TEST(HalpBound, DominatesTrueError) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 1000; ++rep) {
    const int rows = 1 + rep % 9;
    const int cols = 1 + (rep / 9) % 11;
    const CostMatrix c = build_cost_matrix(random_table(rng, rows, cols));
    const int p = std::uniform_int_distribution<int>(1, rows)(rng);
    const int p_hat = std::uniform_int_distribution<int>(1, p)(rng);
    const int j = std::uniform_int_distribution<int>(1, cols)(rng);
    const double err =
        std::abs(halp_channel_cost(c, p_hat, j) - halp_channel_cost(c, p, j));
    // The triangle inequality is often tight, so allow rounding slack.
    EXPECT_LE(err, halp_error_bound(c, p, p_hat, j) + 1e-12);
  }
}

TEST(LatencyJson, RoundTripAndDimensionChecks) {
  const Network n = load_network(testutil::fixture("toy_network.json"));
  const auto tables = latency_from_json(
      read_json_file(testutil::fixture("toy_latency.json")), n);
  ASSERT_EQ(tables.size(), 5u);
  const auto again = latency_from_json(
      nlohmann::json::parse(latency_to_json(tables).dump()), n);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    EXPECT_EQ(again[i].entries, tables[i].entries);
  }
  auto doc = nlohmann::json::parse(latency_to_json(tables).dump());
  doc["layers"][1]["rows"] = 5;
  EXPECT_ERROR_CODE(latency_from_json(doc, n), kDimensionMismatch);
}

TEST(LatencyJson, FixtureMatchesDeviceModel) {
  const Network n = load_network(testutil::fixture("resnet50_network.json"));
  const auto from_file = latency_from_json(
      read_json_file(testutil::fixture("resnet50_latency.json")), n);
  const auto synthesized = synthesize_tables(n, resnet50_device(), 32);
  ASSERT_EQ(from_file.size(), synthesized.size());
  for (std::size_t i = 0; i < from_file.size(); ++i) {
    EXPECT_EQ(from_file[i].entries, synthesized[i].entries) << "layer " << i + 1;
  }
}

}  // namespace
}  // namespace latprune
