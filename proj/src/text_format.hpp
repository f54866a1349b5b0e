#pragma once

// Small helpers shared by the world-file, run-config and CSV readers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace linetrace::text {

struct Entry {
  std::string section;  // empty before the first [section] header
  int section_id = 0;   // increments at every header, so repeats are distinct
  std::string key;
  std::string value;
  int line = 0;
};

// `key = value` lines grouped under optional `[section]` headers. `#` starts
// a comment. Throws Error(kParse) on malformed lines.
std::vector<Entry> parse_entries(std::string_view text);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split_words(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);
std::vector<double> parse_doubles(std::string_view s, std::size_t count,
                                  std::string_view what);

// Shortest representation that round-trips.
std::string format_exact(double v);
// Fixed number of significant digits, locale independent.
std::string format_sig(double v, int digits = 6);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace linetrace::text
