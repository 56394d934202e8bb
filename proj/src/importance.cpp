// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "json_util.hpp"
#include "latprune/error.hpp"
#include "latprune/io.hpp"

namespace latprune {
namespace {

void check_scores(const ChannelScores& s) {
  const std::string where = "layer " + std::to_string(s.layer_id);
  if (s.scores.empty()) {
    throw Error(ErrorCode::kLengthMismatch, where + " has no channel scores");
  }
  for (std::size_t j = 0; j < s.scores.size(); ++j) {
    const double v = s.scores[j];
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteScore,
                  where + " channel " + std::to_string(j + 1));
    }
    if (v < 0.0) {
      throw Error(ErrorCode::kNegativeScore,
                  where + " channel " + std::to_string(j + 1));
    }
  }
}

}  // namespace

std::vector<int> rank_channels(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a - 1] > scores[b - 1];
  });
  return order;
}

LayerImportance aggregate_layer_importance(const ChannelScores& scores) {
  check_scores(scores);
  LayerImportance out;
  out.layer_id = scores.layer_id;
  out.scores = scores.scores;
  out.sorted_indices = rank_channels(scores.scores);
  out.prefix.reserve(scores.scores.size());
  double running = 0.0;
  for (int idx : out.sorted_indices) {
    running += scores.scores[idx - 1];
    out.prefix.push_back(running);
  }
  return out;
}

std::vector<int> arg_top_k(const LayerImportance& importance, int k) {
  if (k < 1 || k > importance.channels()) {
    throw Error(ErrorCode::kKOutOfRange,
                "layer " + std::to_string(importance.layer_id) + " k=" +
                    std::to_string(k) + " outside 1.." +
                    std::to_string(importance.channels()));
  }
  return {importance.sorted_indices.begin(),
          importance.sorted_indices.begin() + k};
}

std::vector<int> arg_top_k(const ChannelScores& scores, int k) {
  return arg_top_k(aggregate_layer_importance(scores), k);
}

std::vector<LayerImportance> build_importances(
    const Network& network, const std::vector<ChannelScores>& scores) {
  std::vector<const ChannelScores*> by_layer(network.num_layers() + 1, nullptr);
  for (const auto& s : scores) {
    if (s.layer_id < 1 || s.layer_id > network.num_layers()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "scores for unknown layer " + std::to_string(s.layer_id));
    }
    if (by_layer[s.layer_id] != nullptr) {
      throw Error(ErrorCode::kLengthMismatch,
                  "layer " + std::to_string(s.layer_id) + " scored twice");
    }
    by_layer[s.layer_id] = &s;
  }
  std::vector<LayerImportance> out;
  out.reserve(network.num_layers());
  for (int l = 1; l <= network.num_layers(); ++l) {
    if (by_layer[l] == nullptr) {
      throw Error(ErrorCode::kLengthMismatch,
                  "layer " + std::to_string(l) + " has no scores");
    }
    const int m = network.channels(l);
    if (static_cast<int>(by_layer[l]->scores.size()) != m) {
      throw Error(ErrorCode::kLengthMismatch,
                  "layer " + std::to_string(l) + " has " +
                      std::to_string(by_layer[l]->scores.size()) +
                      " scores, expected " + std::to_string(m));
    }
    out.push_back(aggregate_layer_importance(*by_layer[l]));
  }
  return out;
}

ImportanceFile importance_from_json(const nlohmann::json& doc) {
  using namespace json_util;
  expect_object(doc, "importance file");
  reject_unknown_keys(doc, {"layers", "num_batches"}, "importance file");
  ImportanceFile file;
  if (auto it = doc.find("num_batches"); it != doc.end() && !it->is_null()) {
    file.num_batches = as_int(*it, "num_batches");
  }
  for (const auto& jl : as_array(require(doc, "layers", "importance file"),
                                 "layers")) {
    expect_object(jl, "importance layer");
    reject_unknown_keys(jl, {"layer_id", "scores"}, "importance layer");
    ChannelScores s;
    s.layer_id = as_int(require(jl, "layer_id", "importance layer"), "layer_id");
    const std::string where = "layer " + std::to_string(s.layer_id);
    // Non-finite values cannot be expressed in JSON; a null stands in for one.
    const auto& raw = as_array(require(jl, "scores", where), "scores");
    for (std::size_t j = 0; j < raw.size(); ++j) {
      if (raw[j].is_null()) {
        throw Error(ErrorCode::kNonFiniteScore,
                    where + " channel " + std::to_string(j + 1));
      }
      s.scores.push_back(as_number(raw[j], "scores"));
    }
    file.layers.push_back(std::move(s));
  }
  return file;
}

nlohmann::ordered_json importance_to_json(const ImportanceFile& file) {
  nlohmann::ordered_json doc;
  auto& layers = doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& s : file.layers) {
    nlohmann::ordered_json jl;
    jl["layer_id"] = s.layer_id;
    jl["scores"] = s.scores;
    layers.push_back(std::move(jl));
  }
  if (file.num_batches) doc["num_batches"] = *file.num_batches;
  return doc;
}

std::vector<LayerImportance> load_importances(const std::filesystem::path& path,
                                              const Network& network) {
  return build_importances(network,
                           importance_from_json(read_json_file(path)).layers);
}

}  // namespace latprune
