#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sgf::io {

/// Whole file as bytes. Throws DataError naming the path.
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never see a
/// partially written file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sgf::io
