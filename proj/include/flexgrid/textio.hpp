#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flexgrid {

// Shortest decimal form that parses back to the same double. Keeps CSV and
// JSON output byte-stable across runs and lets dataset labels round-trip
// exactly.
std::string fmt_double(double v);

// fixed-precision helper for aligned text tables
std::string fmt_fixed(double v, int digits);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Split one CSV record on commas. No quoting support; none of the formats
// written or read here quote fields. Trims spaces and a trailing '\r'.
std::vector<std::string> split_csv_line(std::string_view line);

double parse_double(std::string_view text, const std::string& context);
std::int64_t parse_int(std::string_view text, const std::string& context);

// CRC-32 (polynomial 0xEDB88320, the zlib/PNG one) over a byte span.
std::uint32_t crc32(std::span<const unsigned char> bytes);

} // namespace flexgrid
