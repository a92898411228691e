#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sead {

std::string read_file(const std::filesystem::path& path);

// Splits on '\n'; a trailing newline does not produce an empty last line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place, so readers never
// observe a partially written file. Creates parent directories.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sead
