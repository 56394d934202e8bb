// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LATPRUNE_IO_HPP_
#define LATPRUNE_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace latprune {

// Parses a UTF-8 JSON file. Comments are rejected.
nlohmann::json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace latprune

#endif  // LATPRUNE_IO_HPP_
