#include "text_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "linetrace/error.hpp"

namespace linetrace::text {

namespace {

[[noreturn]] void parse_fail(std::string_view what, std::string_view value) {
  throw Error(ErrorKind::kParse, "invalid " + std::string(what) + ": '" +
                                     std::string(value) + "'");
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != ',') {
      ++i;
    }
    if (i > start) {
      out.push_back(s.substr(start, i - start));
    }
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<Entry> parse_entries(std::string_view text) {
  std::vector<Entry> entries;
  std::string section;
  int section_id = 0;
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string_view line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw Error(ErrorKind::kParse,
                    "line " + std::to_string(line_no) + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      ++section_id;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e;
    e.section = section;
    e.section_id = section_id;
    e.key = std::string(trim(line.substr(0, eq)));
    e.value = std::string(trim(line.substr(eq + 1)));
    e.line = line_no;
    if (e.key.empty()) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(line_no) + ": empty key");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() ||
      !std::isfinite(v)) {
    parse_fail(what, s);
  }
  return v;
}

long long parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    parse_fail(what, s);
  }
  return v;
}

bool parse_bool(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    return false;
  }
  parse_fail(what, s);
}

std::vector<double> parse_doubles(std::string_view s, std::size_t count,
                                  std::string_view what) {
  const auto words = split_words(s);
  if (words.size() != count) {
    throw Error(ErrorKind::kParse, "expected " + std::to_string(count) +
                                       " numbers for " + std::string(what) +
                                       ", got '" + std::string(s) + "'");
  }
  std::vector<double> out;
  out.reserve(count);
  for (auto w : words) {
    out.push_back(parse_double(w, what));
  }
  return out;
}

std::string format_exact(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string format_sig(double v, int digits) {
  if (v == 0.0) {
    return "0";  // also folds -0
  }
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::general, digits);
  return std::string(buf.data(), ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() +
                                    "': file not found or unreadable");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error(ErrorKind::kIo, "write to '" + path.string() + "' failed");
  }
}

}  // namespace linetrace::text
