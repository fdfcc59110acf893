#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace sepeff {

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

std::vector<std::string_view> split_commas(std::string_view line);

/// Strict parse of a finite decimal; the whole field must be consumed.
bool parse_double(std::string_view field, double& out);

/// Opens `path` for writing, creating parent directories. Throws IoError
/// tagged with `module`.
std::ofstream open_output(const std::filesystem::path& path, const char* module);

/// Reads all lines, dropping a trailing '\r' and blank trailing lines.
std::vector<std::string> read_lines(const std::filesystem::path& path, const char* module);

}  // namespace sepeff
