#include "safecase/tabfile.hpp"

#include <fstream>
#include <sstream>

namespace safecase {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

const std::string* TabSection::find(std::string_view key) const {
  const std::string* found = nullptr;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != key) continue;
    if (found) throw TextFormatError(entry_lines[i], "duplicate key '" + std::string(key) + "'");
    found = &entries[i].second;
  }
  return found;
}

const std::string& TabSection::get(std::string_view key) const {
  if (const std::string* v = find(key)) return *v;
  throw TextFormatError(line, "section [" + name + "] is missing key '" + std::string(key) + "'");
}

std::size_t TabSection::line_of(std::string_view key) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].first == key) return entry_lines[i];
  return line;
}

std::vector<TabSection> parse_tabfile(std::string_view text) {
  std::vector<TabSection> sections;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw TextFormatError(line_no, "malformed section header");
      TabSection s;
      s.name = std::string(trim(line.substr(1, line.size() - 2)));
      s.line = line_no;
      sections.push_back(std::move(s));
    } else {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw TextFormatError(line_no, "expected 'key = value'");
      std::string_view key = trim(line.substr(0, eq));
      std::string_view value = trim(line.substr(eq + 1));
      if (key.empty()) throw TextFormatError(line_no, "empty key");
      if (sections.empty()) sections.push_back(TabSection{"", 1, {}, {}});
      sections.back().entries.emplace_back(std::string(key), std::string(value));
      sections.back().entry_lines.push_back(line_no);
    }
    if (eol == text.size()) break;
  }
  return sections;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace safecase
