#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace facademap {

/// Malformed input file. The message names the file and, when known, the line.
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string& file, std::size_t line, const std::string& what);
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace text {

/// Splits on ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view line);
std::string_view trim(std::string_view s);
/// Strips a trailing '#' comment.
std::string_view strip_comment(std::string_view line);

/// Locale-independent parses of a whole token; throw std::invalid_argument.
double parse_double(std::string_view token);
std::int64_t parse_int(std::string_view token);
bool parse_bool(std::string_view token);

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

/// Reads a whole file into lines (no trailing newline characters).
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;  // empty for the leading global block
  std::size_t line = 0;
  std::vector<KeyValue> entries;
};

/// Parses `key = value` lines with '#' comments and `[section]` headers.
/// Sections may repeat; the first element is always the global block.
std::vector<Section> parse_sections(const std::filesystem::path& path);

}  // namespace text
}  // namespace facademap
