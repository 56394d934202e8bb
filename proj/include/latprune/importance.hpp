// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_IMPORTANCE_HPP_
#define LATPRUNE_IMPORTANCE_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "latprune/netgraph.hpp"

namespace latprune {

// Accumulated Taylor importance of every output channel of one layer.
// scores[j - 1] belongs to channel j.
struct ChannelScores {
  int layer_id = 0;
  std::vector<double> scores;
};

// Channels ranked by descending score (ties: lower channel index first) and
// the running totals over that ranking. prefix[i - 1] is the value of keeping
// the best i channels.
struct LayerImportance {
  int layer_id = 0;
  std::vector<int> sorted_indices;  // 1-based channel indices
  std::vector<double> prefix;
  std::vector<double> scores;  // as given, channel order

  int channels() const { return static_cast<int>(prefix.size()); }
  // Importance of keeping `count` channels; count 0 is worth nothing.
  double value(int count) const { return count == 0 ? 0.0 : prefix.at(count - 1); }
};

// 1-based channel indices by descending score, ties by ascending index.
std::vector<int> rank_channels(std::span<const double> scores);

LayerImportance aggregate_layer_importance(const ChannelScores& scores);

// The k best channels in rank order. Throws KOutOfRange unless 1 <= k <= m.
std::vector<int> arg_top_k(const ChannelScores& scores, int k);
std::vector<int> arg_top_k(const LayerImportance& importance, int k);

// One LayerImportance per network layer, in layer order. Every layer must be
// covered exactly once with a vector of length m_l.
std::vector<LayerImportance> build_importances(
    const Network& network, const std::vector<ChannelScores>& scores);

struct ImportanceFile {
  std::vector<ChannelScores> layers;
  std::optional<int> num_batches;
};

ImportanceFile importance_from_json(const nlohmann::json& doc);
nlohmann::ordered_json importance_to_json(const ImportanceFile& file);

std::vector<LayerImportance> load_importances(const std::filesystem::path& path,
                                              const Network& network);

}  // namespace latprune

#endif  // LATPRUNE_IMPORTANCE_HPP_
