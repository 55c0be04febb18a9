#include "facademap/text_format.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace facademap {

FormatError::FormatError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}

namespace text {

namespace {
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }
}  // namespace

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  const auto pos = line.find('#');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

double parse_double(std::string_view token) {
  token = trim(token);
  // from_chars rejects a leading '+', accept it for hand-written files.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::invalid_argument("expected a finite number, got '" + std::string(token) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  std::int64_t value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

bool parse_bool(std::string_view token) {
  token = trim(token);
  if (token == "true" || token == "1" || token == "yes" || token == "on") return true;
  if (token == "false" || token == "0" || token == "no" || token == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + std::string(token) + "'");
}

std::string format_double(double value) { return fmt::format("{}", value); }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<Section> parse_sections(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  const std::string file = path.string();
  std::vector<Section> sections(1);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string_view body = trim(strip_comment(lines[i]));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw FormatError(file, lineno, "malformed section header");
      sections.push_back(Section{std::string(trim(body.substr(1, body.size() - 2))), lineno, {}});
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError(file, lineno, "expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw FormatError(file, lineno, "empty key");
    sections.back().entries.push_back({key, value, lineno});
  }
  return sections;
}

}  // namespace text
}  // namespace facademap
