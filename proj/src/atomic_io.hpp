#pragma once

#include <filesystem>
#include <string>

namespace partreg::detail {

/// Writes content to a temporary sibling file and renames it over the
/// target, so interrupted runs never leave truncated outputs.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace partreg::detail
