#include "safecase/gsn.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace safecase::gsn {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Goal: return "goal";
    case NodeKind::Strategy: return "strategy";
    case NodeKind::Solution: return "solution";
    case NodeKind::Context: return "context";
    case NodeKind::Assumption: return "assumption";
  }
  return "?";
}

std::string_view to_string(Relation relation) {
  return relation == Relation::SupportedBy ? "SupportedBy" : "InContextOf";
}

std::optional<NodeKind> parse_kind(std::string_view text) {
  for (NodeKind k : kAllKinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view text) {
  for (Relation r : kAllRelations)
    if (to_string(r) == text) return r;
  return std::nullopt;
}

const Node* GoalStructure::find(std::string_view id) const {
  for (const Node& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

GoalStructure GoalStructure::canonical() const {
  GoalStructure c = *this;
  std::stable_sort(c.nodes.begin(), c.nodes.end(),
                   [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(c.edges.begin(), c.edges.end());
  return c;
}

bool operator==(const GoalStructure& a, const GoalStructure& b) {
  GoalStructure ca = a.canonical();
  GoalStructure cb = b.canonical();
  return ca.root == cb.root && ca.nodes == cb.nodes && ca.edges == cb.edges;
}

bool edge_allowed(NodeKind source, Relation relation, NodeKind target) {
  if (relation == Relation::SupportedBy) {
    if (source == NodeKind::Goal)
      return target == NodeKind::Goal || target == NodeKind::Strategy || target == NodeKind::Solution;
    if (source == NodeKind::Strategy) return target == NodeKind::Goal;
    return false;
  }
  return (source == NodeKind::Goal || source == NodeKind::Strategy) &&
         (target == NodeKind::Context || target == NodeKind::Assumption);
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

namespace {

std::string edge_subject(const Edge& e) { return e.source + "->" + e.target; }

// Iterative three-colour DFS over SupportedBy edges; reports each back edge once.
std::vector<Edge> supported_by_back_edges(const std::map<std::string, std::vector<std::string>>& children,
                                          const std::vector<std::string>& order) {
  enum class Colour { White, Grey, Black };
  std::map<std::string, Colour> colour;
  for (const auto& id : order) colour[id] = Colour::White;
  std::vector<Edge> back;

  for (const auto& start : order) {
    if (colour[start] != Colour::White) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
    colour[start] = Colour::Grey;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      auto it = children.find(id);
      if (it == children.end() || next >= it->second.size()) {
        colour[id] = Colour::Black;
        stack.pop_back();
        continue;
      }
      const std::string child = it->second[next++];
      if (colour[child] == Colour::Grey) {
        back.push_back(Edge{id, Relation::SupportedBy, child});
      } else if (colour[child] == Colour::White) {
        colour[child] = Colour::Grey;
        stack.emplace_back(child, 0);
      }
    }
  }
  return back;
}

}  // namespace

ValidationReport validate_structure(const GoalStructure& gs) {
  ValidationReport report;
  auto add = [&](std::string_view code, std::string subject, std::string message) {
    report.violations.push_back(Violation{std::string(code), std::move(subject), std::move(message)});
  };

  std::map<std::string, const Node*> by_id;
  for (const Node& n : gs.nodes) {
    if (n.id.empty()) {
      add(codes::kEmptyId, "", "node with empty id");
      continue;
    }
    if (!by_id.emplace(n.id, &n).second)
      add(codes::kDuplicateId, n.id, "id '" + n.id + "' declared more than once");
    if (n.undeveloped && n.kind != NodeKind::Goal && n.kind != NodeKind::Strategy)
      add(codes::kUndevelopedKind, n.id,
          "only goals and strategies can be undeveloped, '" + n.id + "' is a " + std::string(to_string(n.kind)));
    if (n.evidence && n.kind != NodeKind::Solution)
      add(codes::kEvidenceKind, n.id, "evidence reference on non-solution '" + n.id + "'");
  }

  const Node* root = nullptr;
  if (gs.root.empty()) {
    add(codes::kNoRoot, "", "no root goal declared");
  } else if (auto it = by_id.find(gs.root); it == by_id.end()) {
    add(codes::kNoRoot, gs.root, "root '" + gs.root + "' is not a declared node");
  } else {
    root = it->second;
    if (root->kind != NodeKind::Goal)
      add(codes::kRootKind, gs.root, "root '" + gs.root + "' is a " + std::string(to_string(root->kind)));
  }

  std::set<Edge> seen_edges;
  std::map<std::string, std::vector<std::string>> supported_children;
  std::map<std::string, std::vector<std::string>> all_children;
  for (const Edge& e : gs.edges) {
    auto src = by_id.find(e.source);
    auto dst = by_id.find(e.target);
    bool known = true;
    if (src == by_id.end()) {
      add(codes::kUnknownId, edge_subject(e), "edge source '" + e.source + "' is not declared");
      known = false;
    }
    if (dst == by_id.end()) {
      add(codes::kUnknownId, edge_subject(e), "edge target '" + e.target + "' is not declared");
      known = false;
    }
    if (!seen_edges.insert(e).second) {
      add(codes::kDuplicateEdge, edge_subject(e), "duplicate " + std::string(to_string(e.relation)) + " edge");
      continue;
    }
    if (!known) continue;
    if (!edge_allowed(src->second->kind, e.relation, dst->second->kind))
      add(codes::kEdgeType, edge_subject(e),
          std::string(to_string(e.relation)) + " is not allowed from a " +
              std::string(to_string(src->second->kind)) + " to a " + std::string(to_string(dst->second->kind)));
    if (e.relation == Relation::SupportedBy) supported_children[e.source].push_back(e.target);
    all_children[e.source].push_back(e.target);
  }

  std::vector<std::string> ids;
  for (const auto& [id, node] : by_id) ids.push_back(id);

  for (const auto& [id, node] : by_id) {
    bool has_support = supported_children.count(id) > 0;
    if (node->kind == NodeKind::Goal && !node->undeveloped && !has_support)
      add(codes::kUnsupportedGoal, id, "goal '" + id + "' is neither supported nor marked undeveloped");
    if (node->kind == NodeKind::Solution && has_support)
      add(codes::kSolutionNotLeaf, id, "solution '" + id + "' has outgoing SupportedBy edges");
  }

  for (const Edge& e : supported_by_back_edges(supported_children, ids))
    add(codes::kCycle, edge_subject(e), "SupportedBy cycle through " + edge_subject(e));

  if (root) {
    std::set<std::string> reached{root->id};
    std::vector<std::string> frontier{root->id};
    while (!frontier.empty()) {
      std::string id = frontier.back();
      frontier.pop_back();
      if (auto it = all_children.find(id); it != all_children.end())
        for (const auto& child : it->second)
          if (reached.insert(child).second) frontier.push_back(child);
    }
    for (const auto& id : ids)
      if (!reached.count(id)) add(codes::kUnreachable, id, "'" + id + "' is not reachable from the root");
  }
  return report;
}

namespace {

void require_valid(const GoalStructure& gs) {
  ValidationReport r = validate_structure(gs);
  if (!r.ok())
    throw GsnError("invalid goal structure: " + r.violations.front().code + " " + r.violations.front().message);
}

}  // namespace

std::vector<std::string> undeveloped_report(const GoalStructure& gs) {
  require_valid(gs);
  std::vector<std::string> ids;
  for (const Node& n : gs.nodes)
    if (n.undeveloped) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::vector<std::string>> trace_evidence(const GoalStructure& gs, std::string_view goal_id) {
  const Node* goal = gs.find(goal_id);
  if (!goal) throw GsnError("unknown node '" + std::string(goal_id) + "'");
  if (goal->kind != NodeKind::Goal)
    throw GsnError("'" + std::string(goal_id) + "' is a " + std::string(to_string(goal->kind)) + ", not a goal");
  require_valid(gs);

  std::map<std::string, std::vector<std::string>> children;
  for (const Edge& e : gs.edges)
    if (e.relation == Relation::SupportedBy) children[e.source].push_back(e.target);
  for (auto& [id, list] : children) std::sort(list.begin(), list.end());

  std::vector<std::vector<std::string>> paths;
  std::vector<std::string> path{goal->id};
  // Acyclic (validated), so plain recursion terminates.
  auto walk = [&](auto&& self, const std::string& id) -> void {
    if (gs.find(id)->kind == NodeKind::Solution) {
      paths.push_back(path);
      return;
    }
    auto it = children.find(id);
    if (it == children.end()) return;
    for (const auto& child : it->second) {
      path.push_back(child);
      self(self, child);
      path.pop_back();
    }
  };
  walk(walk, goal->id);
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace safecase::gsn
