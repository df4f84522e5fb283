#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kgprobe {

std::string read_file(const std::string& path);

// Writes through a temporary file and renames it into place.
void write_file(const std::string& path, std::string_view content);

// One JSON value per non-blank line. Throws ValidationError with the line
// number on malformed input.
std::vector<nlohmann::json> parse_jsonl(std::string_view content);

// Compact, key-sorted serialization; the byte form used in every JSONL file.
std::string to_jsonl_line(const nlohmann::json& value);

}  // namespace kgprobe
