#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace incompat {

/// Writes text with LF line endings, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace incompat
