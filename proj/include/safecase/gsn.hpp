#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace safecase::gsn {

enum class NodeKind { Goal, Strategy, Solution, Context, Assumption };
enum class Relation { SupportedBy, InContextOf };

inline constexpr NodeKind kAllKinds[] = {NodeKind::Goal, NodeKind::Strategy, NodeKind::Solution,
                                         NodeKind::Context, NodeKind::Assumption};
inline constexpr Relation kAllRelations[] = {Relation::SupportedBy, Relation::InContextOf};

std::string_view to_string(NodeKind kind);
std::string_view to_string(Relation relation);
std::optional<NodeKind> parse_kind(std::string_view text);
std::optional<Relation> parse_relation(std::string_view text);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Goal;
  std::string text;
  bool undeveloped = false;
  /// Path or identifier of an evidence artifact; Solutions only.
  std::optional<std::string> evidence;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string source;
  Relation relation = Relation::SupportedBy;
  std::string target;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A goal structure as declared. Node and edge order carry no meaning;
/// equality compares the canonical (sorted) forms.
struct GoalStructure {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::string root;

  const Node* find(std::string_view id) const;
  /// Copy with nodes sorted by id and edges by (source, relation, target).
  GoalStructure canonical() const;

  friend bool operator==(const GoalStructure& a, const GoalStructure& b);
};

/// Allowed relationship table: SupportedBy from Goal to Goal/Strategy/Solution
/// and from Strategy to Goal; InContextOf from Goal/Strategy to
/// Context/Assumption.
bool edge_allowed(NodeKind source, Relation relation, NodeKind target);

namespace codes {
inline constexpr std::string_view kEmptyId = "EMPTY_ID";
inline constexpr std::string_view kDuplicateId = "DUPLICATE_ID";
inline constexpr std::string_view kUndevelopedKind = "UNDEVELOPED_KIND";
inline constexpr std::string_view kEvidenceKind = "EVIDENCE_KIND";
inline constexpr std::string_view kUnknownId = "UNKNOWN_ID";
inline constexpr std::string_view kDuplicateEdge = "DUPLICATE_EDGE";
inline constexpr std::string_view kEdgeType = "EDGE_TYPE";
inline constexpr std::string_view kNoRoot = "NO_ROOT";
inline constexpr std::string_view kRootKind = "ROOT_KIND";
inline constexpr std::string_view kUnsupportedGoal = "UNSUPPORTED_GOAL";
inline constexpr std::string_view kSolutionNotLeaf = "SOLUTION_NOT_LEAF";
inline constexpr std::string_view kCycle = "CYCLE";
inline constexpr std::string_view kUnreachable = "UNREACHABLE";
}  // namespace codes

struct Violation {
  std::string code;
  /// Node id, or "source->target" for edges.
  std::string subject;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
};

/// Thrown by operations that require a structurally valid input.
class GsnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reports every structural problem; never throws.
ValidationReport validate_structure(const GoalStructure& gs);

/// Sorted ids of undeveloped nodes. Throws GsnError on invalid input.
std::vector<std::string> undeveloped_report(const GoalStructure& gs);

/// Every SupportedBy path from `goal_id` down to a Solution, in lexicographic
/// order of the id sequences. Throws GsnError for unknown ids, non-goals,
/// or invalid structures.
std::vector<std::vector<std::string>> trace_evidence(const GoalStructure& gs, std::string_view goal_id);

}  // namespace safecase::gsn
