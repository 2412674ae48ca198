#pragma once
#include <filesystem>
#include <string>
#include <string_view>

namespace catfuse {

inline constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal representation; "nan"/"inf" for non-finite.
std::string format_double(double v);

// Writes to a temporary sibling and renames it over `path`. Throws Io.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

} // namespace catfuse
