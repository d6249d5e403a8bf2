#pragma once

#include <filesystem>
#include <string>

namespace neurodecode::io {

/// Writes `content` to `path` via a temp file + rename so readers never see a
/// truncated file. Throws std::runtime_error on IO failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Formats a double with enough digits (17) for an exact text round trip.
std::string format_double(double v);

}  // namespace neurodecode::io
