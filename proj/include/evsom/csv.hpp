#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evsom/calendar.hpp"

namespace evsom::csv {

struct Row {
    int line = 0;  // 1-based line number in the source file
    std::vector<std::string> fields;
};

struct File {
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<Row> rows;
};

/// Reads a comma-separated file and checks the header matches exactly.
/// Errors carry "<path>:<line>" context. Empty files are rejected.
File read(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

/// Header-free variant (first line is still treated as the header and returned verbatim).
File read_any(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

double parse_double(const File& f, const Row& r, int field);
Date parse_date(const File& f, const Row& r, int field);
int parse_int(const File& f, const Row& r, int field);

[[noreturn]] void fail(const File& f, const Row& r, const std::string& message);

/// Shortest-%.17g formatting: round-trips IEEE binary64 exactly.
std::string format_full(double v);

/// Compact %.*g formatting for labels where round-tripping is not needed.
std::string format_short(double v, int digits = 6);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

/// FNV-1a 64-bit digest, hex-encoded. Used for artifact fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace evsom::csv
