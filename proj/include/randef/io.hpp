#pragma once
// Text and hashing helpers shared by every file format.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace randef::io {

/// Shortest representation that parses back to the identical double.
std::string formatDouble(double v);
bool parseDouble(std::string_view s, double& out);
bool parseUnsigned(std::string_view s, std::uint64_t& out);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::string sha256Hex(std::string_view bytes);
/// Throws DependencyError when the file cannot be read.
std::string sha256File(const std::string& path);
/// First 16 hex digits of the SHA-256 of the little-endian seed list.
std::string seedListHash(std::span<const std::uint64_t> seeds);

std::string readFile(const std::string& path);
void writeFile(const std::string& path, std::string_view contents);

}  // namespace randef::io
