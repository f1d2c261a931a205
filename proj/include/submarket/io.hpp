#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace submarket {

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// reader never sees a partial file. Creates missing parent directories.
/// Throws DataError on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace submarket
