#pragma once

#include <filesystem>
#include <string>

namespace polariton {

/// Shortest text that round-trips: 17 significant digits.
std::string format_double(double value);

/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace polariton
