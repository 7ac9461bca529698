#pragma once

// String, UTF-8 and TSV helpers shared by the file formats.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "radlabel/error.hpp"

namespace radlabel::text {

// ---------------------------------------------------------------- UTF-8

/// Decode UTF-8; invalid bytes map to U+FFFD.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = ((c & 0x1F) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < s.size()) {
      cp = ((c & 0x0F) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
           (static_cast<unsigned char>(s[i + 2]) & 0x3F);
      len = 3;
    } else if ((c >> 3) == 0x1E && i + 3 < s.size()) {
      cp = ((c & 0x07) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
           ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
           (static_cast<unsigned char>(s[i + 3]) & 0x3F);
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

inline std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

/// Lowercase for ASCII and the Latin-1 supplement (covers å ä ö é ü ...).
constexpr char32_t to_lower(char32_t cp) noexcept {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

/// Letter test for ASCII and Latin-1 letters.
constexpr bool is_letter(char32_t cp) noexcept {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  return cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7;
}

constexpr bool is_space(char32_t cp) noexcept {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' || cp == 0xA0;
}

inline std::string lowercase(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  for (auto& cp : cps) cp = to_lower(cp);
  return encode_utf8(cps);
}

// -------------------------------------------------------------- strings

inline bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_ascii_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Range>
std::string join(const Range& parts, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out.append(sep);
    out.append(p);
    first = false;
  }
  return out;
}

/// Collapse runs of whitespace to one space and trim.
inline std::string collapse_whitespace(std::string_view s) { return join(split_whitespace(s), " "); }

/// Replace tabs and line breaks so a value fits in one TSV cell.
inline std::string tsv_cell(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return out;
}

// -------------------------------------------------------------- numbers

/// Shortest round-trip representation; always carries a decimal point.
inline std::string format_decimal(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

/// Shortest round-trip representation (no forced decimal point).
inline std::string format_shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

inline std::string format_percent(double fraction, int decimals = 1) {
  return format_fixed(100.0 * fraction, decimals) + "%";
}

inline double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != last)
    throw DataError("invalid number for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError("invalid integer for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

/// Parse a comma-separated list of non-negative integers ("" gives an empty list).
inline std::vector<std::size_t> parse_index_list(std::string_view s, std::string_view what) {
  std::vector<std::size_t> out;
  s = trim(s);
  if (s.empty() || s == "-") return out;
  for (const auto& part : split(s, ',')) {
    const long long v = parse_int(part, what);
    if (v < 0) throw DataError("negative index in " + std::string(what) + ": " + part);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// ---------------------------------------------------------------- files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

/// One data row of a TSV file with its 1-based line number.
struct TsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Parsed TSV: `#` comment lines are collected separately, blank lines skipped,
/// and the first remaining line is the header.
struct TsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<TsvRow> rows;

  /// Column index by name; throws DataError naming `source` when absent.
  std::size_t column(std::string_view name, std::string_view source) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError(std::string(source) + ": missing column '" + std::string(name) + "'");
  }
};

inline TsvTable parse_tsv(std::string_view content, std::string_view source, bool has_header = true) {
  TsvTable table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = !has_header;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      table.comments.emplace_back(line);
      continue;
    }
    auto fields = split(line, '\t');
    if (!header_seen) {
      table.header = std::move(fields);
      header_seen = true;
      continue;
    }
    if (has_header && fields.size() != table.header.size())
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    table.rows.push_back({line_no, std::move(fields)});
  }
  if (has_header && !header_seen) throw DataError(std::string(source) + ": empty file (no header)");
  return table;
}

inline TsvTable read_tsv(const std::string& path, bool has_header = true) {
  return parse_tsv(read_file(path), path, has_header);
}

/// Context prefix "file:line: " for data errors.
inline std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

// ---------------------------------------------------------------- hashing

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace radlabel::text
