#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safecase/gsn.hpp"

namespace safecase::casefile {

/// Location in the source text. `offset` is the 0-based byte offset of the
/// first character; line and column are 1-based (columns count bytes).
struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t length = 0;
  std::size_t offset = 0;
};

enum class ErrorKind { Lexical, Syntax, Semantic };

struct ParseError {
  SourceSpan span;
  ErrorKind kind = ErrorKind::Syntax;
  /// Stable code, e.g. "BAD_TOKEN", "UNEXPECTED_TOKEN", "UNKNOWN_ID",
  /// or one of the gsn::codes.
  std::string code;
  std::string message;
  /// Description of what would have been accepted; empty for semantic errors.
  std::string expected;
};

struct ParseResult {
  gsn::GoalStructure structure;
  std::vector<ParseError> errors;
  bool ok() const { return errors.empty(); }
};

/// Parses a `.case` document:
///
///     file  := line*
///     decl  := kind ID STRING attrs?
///     kind  := "goal" | "strategy" | "solution" | "context" | "assumption"
///     attrs := "{" ( "undeveloped" | "evidence" "=" STRING | "root" )* "}"
///     edge  := ID ( "<-" | "<~" ) ID
///
/// `A <- B` declares A SupportedBy B, `A <~ C` declares A InContextOf C.
/// At most one declaration per line, `#` starts a comment. On success the
/// structure passes gsn::validate_structure; otherwise every error found is
/// returned, each with a span inside the input.
ParseResult parse_casefile(std::string_view text);

std::string format_error(const ParseError& e, std::string_view filename = {});

/// Canonical JSON: sorted keys, nodes by id, edges by (source, relation, target).
std::string render_json(const gsn::GoalStructure& gs);

class JsonFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

gsn::GoalStructure parse_json(std::string_view json);

/// Graphviz digraph with one statement per node and per edge, sorted.
std::string render_dot(const gsn::GoalStructure& gs);

/// `.case` text for a structure; parse_casefile(render_case(gs)) == gs.
std::string render_case(const gsn::GoalStructure& gs);

}  // namespace safecase::casefile
