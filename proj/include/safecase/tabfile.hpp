#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace safecase {

/// Error in a `key = value` text file, carrying the 1-based line number.
class TextFormatError : public std::runtime_error {
 public:
  TextFormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One `[name]` section of a table file. Keys keep file order and may repeat.
struct TabSection {
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::size_t> entry_lines;

  /// Value of a key that must appear exactly once.
  const std::string& get(std::string_view key) const;
  const std::string* find(std::string_view key) const;
  std::size_t line_of(std::string_view key) const;
};

/// Parses the shared table format:
///
///     # comment
///     [section]
///     key = value
///
/// Entries before the first header belong to a section with an empty name.
/// CRLF line endings are accepted.
std::vector<TabSection> parse_tabfile(std::string_view text);

std::string read_file(const std::string& path);

}  // namespace safecase
