// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

// Strict accessors shared by the JSON readers.

#ifndef LATPRUNE_SRC_JSON_UTIL_HPP_
#define LATPRUNE_SRC_JSON_UTIL_HPP_

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "latprune/error.hpp"

namespace latprune::json_util {

inline void expect_object(const nlohmann::json& j, std::string_view what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be an object");
  }
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<std::string_view> allowed,
                                std::string_view what) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      throw Error(ErrorCode::kParseError,
                  "unknown key '" + key + "' in " + std::string(what));
    }
  }
}

inline const nlohmann::json& require(const nlohmann::json& j,
                                     std::string_view key,
                                     std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kParseError, "missing key '" + std::string(key) +
                                            "' in " + std::string(what));
  }
  return *it;
}

inline int as_int(const nlohmann::json& v, std::string_view what) {
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be an integer");
  }
  return v.get<int>();
}

inline double as_number(const nlohmann::json& v, std::string_view what) {
  if (!v.is_number()) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be a number");
  }
  return v.get<double>();
}

inline std::string as_string(const nlohmann::json& v, std::string_view what) {
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be a string");
  }
  return v.get<std::string>();
}

inline const nlohmann::json& as_array(const nlohmann::json& v,
                                      std::string_view what) {
  if (!v.is_array()) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must be an array");
  }
  return v;
}

inline std::vector<double> as_number_vector(const nlohmann::json& v,
                                            std::string_view what) {
  as_array(v, what);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, what));
  return out;
}

}  // namespace latprune::json_util

#endif  // LATPRUNE_SRC_JSON_UTIL_HPP_
