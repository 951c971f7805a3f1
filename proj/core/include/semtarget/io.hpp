#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace semtarget {

// Whole-file helpers. Both throw IoError naming the path on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace semtarget
