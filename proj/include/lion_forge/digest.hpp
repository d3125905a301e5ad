// Copyright 2026 The lion-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace lion_forge {

inline constexpr std::string_view kToolName = "lion_forge";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents. Throws ValidationError if unreadable.
std::string file_sha256(const std::filesystem::path& path);

/// Compact dump with sorted keys. nlohmann::json objects are std::map backed,
/// so this is byte-stable for equal documents.
std::string canonical_dump(const nlohmann::json& doc);

/// printf-style fixed notation, used for CSV and text reports.
std::string format_fixed(double value, int precision = 6);

std::string read_file(const std::filesystem::path& path);

/// Writes text and returns its SHA-256. Parent directories are created.
std::string write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace lion_forge
