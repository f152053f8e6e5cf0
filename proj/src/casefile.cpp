#include "safecase/casefile.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace safecase::casefile {

namespace {

using gsn::Edge;
using gsn::GoalStructure;
using gsn::Node;
using gsn::NodeKind;
using gsn::Relation;

enum class Tok { Ident, String, LBrace, RBrace, Equals, SupportArrow, ContextArrow };

struct Token {
  Tok kind;
  std::string text;  // identifier or unescaped string contents
  SourceSpan span;
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Equals: return "'='";
    case Tok::SupportArrow: return "'<-'";
    case Tok::ContextArrow: return "'<~'";
  }
  return "?";
}

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '_' || c == '-'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParseResult run() {
    std::size_t pos = 0;
    std::size_t line = 1;
    while (pos < text_.size()) {
      std::size_t eol = text_.find('\n', pos);
      if (eol == std::string_view::npos) eol = text_.size();
      std::size_t end = eol;
      if (end > pos && text_[end - 1] == '\r') --end;
      std::vector<Token> tokens;
      if (lex_line(pos, end, line, tokens)) parse_line(tokens, SourceSpan{line, 1, end - pos, pos});
      pos = eol + 1;
      ++line;
    }
    if (result_.errors.empty()) map_validation();
    std::stable_sort(result_.errors.begin(), result_.errors.end(),
                     [](const ParseError& a, const ParseError& b) { return a.span.offset < b.span.offset; });
    return std::move(result_);
  }

 private:
  SourceSpan span_at(std::size_t line, std::size_t line_start, std::size_t offset, std::size_t length) const {
    return SourceSpan{line, offset - line_start + 1, length, offset};
  }

  void error(ErrorKind kind, std::string code, SourceSpan span, std::string message, std::string expected = {}) {
    result_.errors.push_back(ParseError{span, kind, std::move(code), std::move(message), std::move(expected)});
  }

  // Tokenizes [begin, end). Returns false (after reporting) on a lexical error.
  bool lex_line(std::size_t begin, std::size_t end, std::size_t line, std::vector<Token>& out) {
    std::size_t i = begin;
    while (i < end) {
      char c = text_[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '#') break;
      std::size_t start = i;
      if (ident_start(c)) {
        while (i < end && ident_char(text_[i])) ++i;
        out.push_back(Token{Tok::Ident, std::string(text_.substr(start, i - start)),
                            span_at(line, begin, start, i - start)});
      } else if (c == '"') {
        std::string value;
        ++i;
        bool closed = false;
        while (i < end) {
          char d = text_[i];
          if (d == '"') {
            closed = true;
            ++i;
            break;
          }
          if (d == '\\') {
            if (i + 1 >= end) break;
            char e = text_[i + 1];
            switch (e) {
              case '"': value.push_back('"'); break;
              case '\\': value.push_back('\\'); break;
              case 'n': value.push_back('\n'); break;
              case 't': value.push_back('\t'); break;
              default:
                error(ErrorKind::Lexical, "BAD_ESCAPE", span_at(line, begin, i, 2),
                      "unknown escape sequence '\\" + std::string(1, e) + "'", "\\\" \\\\ \\n \\t");
                return false;
            }
            i += 2;
            continue;
          }
          value.push_back(d);
          ++i;
        }
        if (!closed) {
          error(ErrorKind::Lexical, "UNTERMINATED_STRING", span_at(line, begin, start, end - start),
                "string is not closed before the end of the line", "'\"'");
          return false;
        }
        out.push_back(Token{Tok::String, std::move(value), span_at(line, begin, start, i - start)});
      } else if (c == '{' || c == '}' || c == '=') {
        Tok t = c == '{' ? Tok::LBrace : c == '}' ? Tok::RBrace : Tok::Equals;
        out.push_back(Token{t, std::string(1, c), span_at(line, begin, start, 1)});
        ++i;
      } else if (c == '<' && i + 1 < end && (text_[i + 1] == '-' || text_[i + 1] == '~')) {
        Tok t = text_[i + 1] == '-' ? Tok::SupportArrow : Tok::ContextArrow;
        out.push_back(Token{t, std::string(text_.substr(i, 2)), span_at(line, begin, start, 2)});
        i += 2;
      } else {
        std::string shown = static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f
                                ? "byte 0x" + hex(static_cast<unsigned char>(c))
                                : "'" + std::string(1, c) + "'";
        error(ErrorKind::Lexical, "BAD_TOKEN", span_at(line, begin, start, 1), "unexpected character " + shown,
              "identifier, string, '{', '}', '=', '<-' or '<~'");
        return false;
      }
    }
    return true;
  }

  static std::string hex(unsigned char b) {
    const char* digits = "0123456789abcdef";
    return std::string{digits[b >> 4], digits[b & 15]};
  }

  void unexpected(const std::vector<Token>& toks, std::size_t at, const SourceSpan& line_span,
                  std::string expected) {
    if (at < toks.size()) {
      error(ErrorKind::Syntax, "UNEXPECTED_TOKEN", toks[at].span,
            "unexpected " + std::string(describe(toks[at].kind)), std::move(expected));
    } else {
      // Point at the last character of the line.
      SourceSpan s = line_span;
      std::size_t last = s.length == 0 ? 0 : s.length - 1;
      s.offset += last;
      s.column += last;
      s.length = s.length == 0 ? 0 : 1;
      error(ErrorKind::Syntax, "UNEXPECTED_END", s, "unexpected end of line", std::move(expected));
    }
  }

  void parse_line(const std::vector<Token>& toks, const SourceSpan& line_span) {
    if (toks.empty()) return;
    if (toks[0].kind != Tok::Ident) {
      unexpected(toks, 0, line_span, "declaration or edge");
      return;
    }
    if (toks.size() >= 2 && (toks[1].kind == Tok::SupportArrow || toks[1].kind == Tok::ContextArrow)) {
      parse_edge(toks, line_span);
      return;
    }
    auto kind = gsn::parse_kind(toks[0].text);
    if (!kind) {
      error(ErrorKind::Syntax, "UNEXPECTED_TOKEN", toks[0].span, "'" + toks[0].text + "' is not an element kind",
            "goal, strategy, solution, context, assumption, or an edge 'ID <- ID'");
      return;
    }
    parse_decl(*kind, toks, line_span);
  }

  void parse_edge(const std::vector<Token>& toks, const SourceSpan& line_span) {
    if (toks.size() < 3 || toks[2].kind != Tok::Ident) {
      unexpected(toks, 2, line_span, "identifier");
      return;
    }
    if (toks.size() > 3) {
      unexpected(toks, 3, line_span, "end of line");
      return;
    }
    Relation rel = toks[1].kind == Tok::SupportArrow ? Relation::SupportedBy : Relation::InContextOf;
    Edge e{toks[0].text, rel, toks[2].text};
    SourceSpan span = toks[0].span;
    span.length = toks[2].span.offset + toks[2].span.length - toks[0].span.offset;
    edge_spans_[e].push_back(span);
    edge_ends_[e].push_back({toks[0].span, toks[2].span});
    result_.structure.edges.push_back(std::move(e));
  }

  void parse_decl(NodeKind kind, const std::vector<Token>& toks, const SourceSpan& line_span) {
    if (toks.size() < 2 || toks[1].kind != Tok::Ident) {
      unexpected(toks, 1, line_span, "identifier");
      return;
    }
    if (toks.size() < 3 || toks[2].kind != Tok::String) {
      unexpected(toks, 2, line_span, "string");
      return;
    }
    Node node{toks[1].text, kind, toks[2].text, false, std::nullopt};
    bool is_root = false;
    std::size_t i = 3;
    if (i < toks.size()) {
      if (toks[i].kind != Tok::LBrace) {
        unexpected(toks, i, line_span, "'{' or end of line");
        return;
      }
      ++i;
      bool closed = false;
      while (i < toks.size()) {
        const Token& t = toks[i];
        if (t.kind == Tok::RBrace) {
          closed = true;
          ++i;
          break;
        }
        if (t.kind == Tok::Ident && t.text == "undeveloped") {
          node.undeveloped = true;
          ++i;
        } else if (t.kind == Tok::Ident && t.text == "root") {
          is_root = true;
          ++i;
        } else if (t.kind == Tok::Ident && t.text == "evidence") {
          if (i + 1 >= toks.size() || toks[i + 1].kind != Tok::Equals) {
            unexpected(toks, i + 1, line_span, "'='");
            return;
          }
          if (i + 2 >= toks.size() || toks[i + 2].kind != Tok::String) {
            unexpected(toks, i + 2, line_span, "string");
            return;
          }
          node.evidence = toks[i + 2].text;
          i += 3;
        } else {
          unexpected(toks, i, line_span, "undeveloped, evidence, root or '}'");
          return;
        }
      }
      if (!closed) {
        unexpected(toks, i, line_span, "'}'");
        return;
      }
      if (i < toks.size()) {
        unexpected(toks, i, line_span, "end of line");
        return;
      }
    }
    if (is_root) {
      if (!result_.structure.root.empty())
        error(ErrorKind::Semantic, "MULTIPLE_ROOTS", toks[1].span,
              "root already declared as '" + result_.structure.root + "'");
      else
        result_.structure.root = node.id;
    }
    node_spans_[node.id].push_back(toks[1].span);
    result_.structure.nodes.push_back(std::move(node));
  }

  std::optional<SourceSpan> node_span(const std::string& id, std::size_t occurrence = 0) const {
    auto it = node_spans_.find(id);
    if (it == node_spans_.end() || it->second.size() <= occurrence) return std::nullopt;
    return it->second[occurrence];
  }

  // Violations from the structural validator, translated to source positions.
  void map_validation() {
    gsn::ValidationReport report = gsn::validate_structure(result_.structure);
    std::map<std::string, std::size_t> duplicate_count;
    for (const gsn::Violation& v : report.violations) {
      SourceSpan span{1, 1, 0, 0};
      auto arrow = v.subject.find("->");
      if (arrow != std::string::npos && v.code != gsn::codes::kCycle) {
        std::string src = v.subject.substr(0, arrow);
        std::string dst = v.subject.substr(arrow + 2);
        std::vector<SourceSpan> spans;
        std::vector<std::pair<SourceSpan, SourceSpan>> ends;
        for (const auto& [edge, list] : edge_spans_)
          if (edge.source == src && edge.target == dst) {
            spans.insert(spans.end(), list.begin(), list.end());
            const auto& e = edge_ends_.at(edge);
            ends.insert(ends.end(), e.begin(), e.end());
          }
        if (!spans.empty()) {
          if (v.code == gsn::codes::kDuplicateEdge) {
            std::size_t n = ++duplicate_count[v.subject];
            span = spans[std::min(n, spans.size() - 1)];
          } else if (v.code == gsn::codes::kUnknownId) {
            bool target = v.message.find("edge target") != std::string::npos;
            span = target ? ends.front().second : ends.front().first;
          } else {
            span = spans.front();
          }
        }
      } else if (arrow != std::string::npos) {
        std::string src = v.subject.substr(0, arrow);
        std::string dst = v.subject.substr(arrow + 2);
        auto it = edge_spans_.find(Edge{src, Relation::SupportedBy, dst});
        if (it != edge_spans_.end()) span = it->second.front();
      } else if (v.code == gsn::codes::kDuplicateId) {
        std::size_t n = ++duplicate_count[v.subject];
        if (auto s = node_span(v.subject, n)) span = *s;
      } else if (auto s = node_span(v.subject)) {
        span = *s;
      }
      error(ErrorKind::Semantic, v.code, span, v.message);
    }
  }

  std::string_view text_;
  ParseResult result_;
  std::map<std::string, std::vector<SourceSpan>> node_spans_;
  std::map<Edge, std::vector<SourceSpan>> edge_spans_;
  std::map<Edge, std::vector<std::pair<SourceSpan, SourceSpan>>> edge_ends_;
};

std::string escape_case_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string escape_dot(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

ParseResult parse_casefile(std::string_view text) { return Parser(text).run(); }

std::string format_error(const ParseError& e, std::string_view filename) {
  std::ostringstream os;
  if (!filename.empty()) os << filename << ':';
  os << e.span.line << ':' << e.span.column << ": ";
  switch (e.kind) {
    case ErrorKind::Lexical: os << "lexical error"; break;
    case ErrorKind::Syntax: os << "syntax error"; break;
    case ErrorKind::Semantic: os << "error"; break;
  }
  os << " [" << e.code << "] " << e.message;
  if (!e.expected.empty()) os << " (expected " << e.expected << ")";
  return os.str();
}

std::string render_json(const GoalStructure& gs) {
  GoalStructure c = gs.canonical();
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : c.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", std::string(gsn::to_string(n.kind))},
                     {"text", n.text},
                     {"undeveloped", n.undeveloped},
                     {"evidence", n.evidence ? nlohmann::json(*n.evidence) : nlohmann::json(nullptr)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : c.edges)
    edges.push_back({{"source", e.source}, {"relation", std::string(gsn::to_string(e.relation))}, {"target", e.target}});
  nlohmann::json doc = {{"edges", edges}, {"nodes", nodes}, {"root", c.root}};
  return doc.dump(2) + "\n";
}

GoalStructure parse_json(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw JsonFormatError(e.what());
  }
  try {
    GoalStructure gs;
    gs.root = doc.at("root").get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      auto kind = gsn::parse_kind(n.at("kind").get<std::string>());
      if (!kind) throw JsonFormatError("unknown node kind '" + n.at("kind").get<std::string>() + "'");
      Node node{n.at("id").get<std::string>(), *kind, n.at("text").get<std::string>(),
                n.at("undeveloped").get<bool>(), std::nullopt};
      if (!n.at("evidence").is_null()) node.evidence = n.at("evidence").get<std::string>();
      gs.nodes.push_back(std::move(node));
    }
    for (const auto& e : doc.at("edges")) {
      auto rel = gsn::parse_relation(e.at("relation").get<std::string>());
      if (!rel) throw JsonFormatError("unknown relation '" + e.at("relation").get<std::string>() + "'");
      gs.edges.push_back(Edge{e.at("source").get<std::string>(), *rel, e.at("target").get<std::string>()});
    }
    return gs;
  } catch (const nlohmann::json::exception& e) {
    throw JsonFormatError(e.what());
  }
}

std::string render_dot(const GoalStructure& gs) {
  GoalStructure c = gs.canonical();
  std::ostringstream os;
  os << "digraph gsn {\n";
  os << "  rankdir=TB;\n";
  os << "  node [fontname=\"Helvetica\", fontsize=10];\n";
  for (const Node& n : c.nodes) {
    std::string attrs;
    switch (n.kind) {
      case NodeKind::Goal: attrs = "shape=box"; break;
      case NodeKind::Strategy: attrs = "shape=parallelogram"; break;
      case NodeKind::Solution: attrs = "shape=circle"; break;
      case NodeKind::Context: attrs = "shape=box, style=rounded"; break;
      case NodeKind::Assumption: attrs = "shape=box, style=rounded, xlabel=\"A\""; break;
    }
    if (n.undeveloped) attrs += ", peripheries=2, xlabel=\"undeveloped\"";
    std::string label = n.id + "\n" + n.text;
    if (n.evidence) label += "\n[" + *n.evidence + "]";
    os << "  \"" << escape_dot(n.id) << "\" [" << attrs << ", label=\"" << escape_dot(label) << "\"];\n";
  }
  for (const Edge& e : c.edges) {
    os << "  \"" << escape_dot(e.source) << "\" -> \"" << escape_dot(e.target) << "\"";
    if (e.relation == Relation::InContextOf)
      os << " [style=dashed, arrowhead=empty]";
    else
      os << " [arrowhead=normal]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string render_case(const GoalStructure& gs) {
  GoalStructure c = gs.canonical();
  std::ostringstream os;
  for (const Node& n : c.nodes) {
    os << gsn::to_string(n.kind) << ' ' << n.id << ' ' << escape_case_string(n.text);
    std::vector<std::string> attrs;
    if (n.id == c.root) attrs.push_back("root");
    if (n.undeveloped) attrs.push_back("undeveloped");
    if (n.evidence) attrs.push_back("evidence = " + escape_case_string(*n.evidence));
    if (!attrs.empty()) {
      os << " {";
      for (const auto& a : attrs) os << ' ' << a;
      os << " }";
    }
    os << '\n';
  }
  for (const Edge& e : c.edges)
    os << e.source << (e.relation == Relation::SupportedBy ? " <- " : " <~ ") << e.target << '\n';
  return os.str();
}

}  // namespace safecase::casefile
