#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace spreadlab::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on invalid input or usage, 2 on I/O failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64-bit hash of a file's bytes.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace spreadlab::cli
