#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vkg {

/// Whole-file read. Throws IoError.
std::string read_text(const std::filesystem::path& path);

/// Whole-file write, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace vkg
