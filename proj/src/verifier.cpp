#include "safecase/verifier.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "safecase/config.hpp"

namespace safecase::verifier {

using scenario::Disturbance;
using scenario::ScenarioParams;
using scenario::VehicleState;

void Grid::validate() const {
  if (d_step <= 0 || v_step <= 0) throw GridError("grid steps must be positive");
  if (d_max < 0 || v_max < 0) throw GridError("grid ranges must not be negative");
  if (d_max % d_step != 0) throw GridError("d_step does not divide d_max");
  if (v_max % v_step != 0) throw GridError("v_step does not divide v_max");
  if (d_max / d_step > 10'000'000 || v_max > 1'000'000'000) throw GridError("grid too large");
}

Grid parse_grid(std::string_view spec) {
  Grid g;
  std::array<bool, 4> seen{};
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t end = spec.find_first_of(",\n", pos);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view item = spec.substr(pos, end - pos);
    pos = end + 1;
    while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
    while (!item.empty() && (item.back() == ' ' || item.back() == '\t' || item.back() == '\r')) item.remove_suffix(1);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw GridError("grid item '" + std::string(item) + "' is not key=value");
    std::string_view key = item.substr(0, eq);
    std::string_view value = item.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);

    std::size_t slot;
    config::Dimension dim;
    std::int64_t* target;
    if (key == "d_max") {
      slot = 0, dim = config::Dimension::Length, target = &g.d_max;
    } else if (key == "d_step") {
      slot = 1, dim = config::Dimension::Length, target = &g.d_step;
    } else if (key == "v_max") {
      slot = 2, dim = config::Dimension::Speed, target = &g.v_max;
    } else if (key == "v_step") {
      slot = 3, dim = config::Dimension::Speed, target = &g.v_step;
    } else {
      throw GridError("unknown grid key '" + std::string(key) + "'");
    }
    if (seen[slot]) throw GridError("grid key '" + std::string(key) + "' given twice");
    seen[slot] = true;
    Rational q;
    try {
      q = config::parse_quantity(value, dim);
    } catch (const std::exception& e) {
      throw GridError(std::string(key) + ": " + e.what());
    }
    if (!q.is_integer()) throw GridError(std::string(key) + " must be a whole number of mm or mm/s");
    *target = q.num();
    if (end == spec.size()) break;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw GridError("grid needs d_max, d_step, v_max and v_step");
  g.validate();
  return g;
}

std::string render_grid(const Grid& g) {
  using config::Dimension;
  std::ostringstream os;
  os << "d_max = " << config::render_quantity(g.d_max, Dimension::Length) << "\n"
     << "d_step = " << config::render_quantity(g.d_step, Dimension::Length) << "\n"
     << "v_max = " << config::render_quantity(g.v_max, Dimension::Speed) << "\n"
     << "v_step = " << config::render_quantity(g.v_step, Dimension::Speed) << "\n";
  return os.str();
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Certified: return "CERTIFIED";
    case Outcome::Falsified: return "COUNTEREXAMPLE";
    case Outcome::NotProvable: return "NOT_PROVABLE_AT_GRID";
  }
  return "?";
}

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

bool guard_at(std::int64_t gap, std::int64_t v, std::int64_t sensor_err, const ScenarioParams& p) {
  VehicleState s{0, v, gap, true};
  return scenario::safe_predicate(scenario::sense(s, sensor_err), v, 0, p);
}

// required[v]: smallest gap from which worst-case braking (a = a_min + delta)
// stops without reaching the pedestrian; kNever when braking cannot slow down.
std::vector<std::int64_t> required_gaps(const ScenarioParams& p, std::int64_t v_max) {
  std::vector<std::int64_t> travel(static_cast<std::size_t>(v_max) + 1, 0);
  std::vector<std::int64_t> required(travel.size(), 0);
  const Disturbance worst{0, p.delta, false};
  for (std::int64_t v = 1; v <= v_max; ++v) {
    VehicleState n = scenario::plant_step(VehicleState{0, v, 0, false}, p.a_min, worst, p);
    auto i = static_cast<std::size_t>(v);
    if (n.v >= v || travel[static_cast<std::size_t>(n.v)] == kNever) {
      travel[i] = required[i] = kNever;
    } else {
      travel[i] = n.x + travel[static_cast<std::size_t>(n.v)];
      required[i] = travel[i] + 1;
    }
  }
  return required;
}

struct ClosureFailure {
  std::int64_t speed;
  std::int64_t gap;
  std::string what;
};

std::optional<ClosureFailure> check_closure(const ScenarioParams& p, std::int64_t v_max,
                                            const std::vector<std::int64_t>& required, std::size_t& checked) {
  const std::int64_t err = std::max<std::int64_t>(0, p.epsilon.floor());
  auto step_ok = [&](std::int64_t gap, std::int64_t v, const Rational& areq) -> std::optional<std::string> {
    for (const Rational& e : {p.delta, -p.delta}) {
      VehicleState s{0, v, gap, true};
      VehicleState n = scenario::plant_step(s, areq, Disturbance{err, e, false}, p);
      if (scenario::collides(s, n)) return "collision";
      if (n.v > v_max) return "speed leaves the grid";
      if (required[static_cast<std::size_t>(n.v)] > n.xp - n.x) return "successor cannot stop in time";
    }
    return std::nullopt;
  };

  for (std::int64_t v = 0; v <= v_max; ++v) {
    ++checked;
    std::int64_t lo = required[static_cast<std::size_t>(v)];
    if (lo == kNever) continue;
    if (auto why = step_ok(lo, v, p.a_min)) return ClosureFailure{v, lo, "braking: " + *why};

    // Smallest gap >= lo where the optimistic reading lets the controller cruise.
    std::int64_t hi = lo;
    std::int64_t stride = 1;
    while (!guard_at(hi, v, err, p)) {
      hi += stride;
      stride *= 2;
    }
    std::int64_t low = std::max(lo, hi - stride / 2 - 1);
    while (low < hi) {
      std::int64_t mid = low + (hi - low) / 2;
      if (guard_at(mid, v, err, p)) {
        hi = mid;
      } else {
        low = mid + 1;
      }
    }
    Rational areq = scenario::controller(scenario::sense(VehicleState{0, v, hi, true}, err), v, 0, p);
    if (auto why = step_ok(hi, v, areq)) return ClosureFailure{v, hi, "cruising: " + *why};
  }
  return std::nullopt;
}

struct Node {
  std::int64_t gap;
  std::int64_t v;
  std::int64_t parent;  // -1 for initial states
  std::uint8_t choice;
};

struct KeyHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
    return std::hash<std::int64_t>()(k.first * 1'000'003 + k.second);
  }
};

// Actuation at +delta first: successors are monotone in act_err, so the
// narrow adversary usually finds the shortest trace at a fraction of the cost.
std::vector<Disturbance> choices(const ScenarioParams& p, bool full) {
  const std::int64_t err = std::max<std::int64_t>(0, p.epsilon.floor());
  std::vector<Disturbance> moves{Disturbance{err, p.delta, true}, Disturbance{0, p.delta, true}};
  if (full) {
    moves.push_back(Disturbance{err, -p.delta, true});
    moves.push_back(Disturbance{0, -p.delta, true});
  }
  return moves;
}

// Breadth-first search for a minimal-depth colliding trace from one initial state.
std::optional<Counterexample> search_from(const VehicleState& start, const ScenarioParams& p,
                                          const std::vector<Disturbance>& moves, const SearchOptions& options,
                                          std::size_t& budget, std::size_t& explored) {
  std::vector<Node> nodes{{start.xp - start.x, start.v, -1, 0}};
  std::unordered_set<std::pair<std::int64_t, std::int64_t>, KeyHash> seen;
  std::size_t level_begin = 0;
  for (std::size_t depth = 1; depth <= options.horizon; ++depth) {
    std::size_t level_end = nodes.size();
    if (level_begin == level_end) break;
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (std::size_t m = 0; m < moves.size(); ++m) {
        const Node& from = nodes[i];
        VehicleState s{0, from.v, from.gap, from.parent >= 0};
        scenario::StepResult r = scenario::closed_loop_step(s, moves[m], p);
        ++explored;
        if (r.collided) {
          Counterexample c;
          c.initial = start;
          c.collision_step = depth;
          c.disturbances.push_back(moves[m]);
          for (std::size_t k = i; nodes[k].parent >= 0; k = static_cast<std::size_t>(nodes[k].parent))
            c.disturbances.push_back(moves[nodes[k].choice]);
          std::reverse(c.disturbances.begin(), c.disturbances.end());
          for (std::size_t k = 1; k < c.disturbances.size(); ++k) c.disturbances[k].ped_enters = false;
          c.impact_speed = scenario::crossing_speed(s, r.areq + moves[m].act_err);
          return c;
        }
        std::pair<std::int64_t, std::int64_t> key{r.next.xp - r.next.x, r.next.v};
        if (!seen.insert(key).second) continue;
        if (budget == 0) return std::nullopt;
        --budget;
        nodes.push_back(Node{key.first, key.second, static_cast<std::int64_t>(i), static_cast<std::uint8_t>(m)});
      }
    }
    level_begin = level_end;
  }
  return std::nullopt;
}

}  // namespace

SafeEnvelope compute_safe_envelope(const ScenarioParams& p, const Grid& g) {
  g.validate();
  SafeEnvelope env;
  env.grid = g;
  env.params_digest = certificate::params_digest(p, g);
  env.max_speed.resize(g.cells());
  const std::int64_t top = g.v_max / g.v_step;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    std::int64_t lo = 0;
    std::int64_t hi = top;
    while (lo < hi) {
      std::int64_t mid = lo + (hi - lo + 1) / 2;
      if (guard_at(g.distance(i), mid * g.v_step, 0, p)) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    env.max_speed[i] = lo * g.v_step;
  }
  return env;
}

VerificationResult verify_closed_loop(const ScenarioParams& p, const Grid& g, const SearchOptions& options) {
  p.validate();
  g.validate();
  if (p.pass_option) throw scenario::ScenarioError("the pass option cannot be verified");
  const std::int64_t start_gap = p.range.floor();
  const std::int64_t start_speed = p.v_target.floor();
  if (start_gap > g.d_max) throw GridError("grid d_max does not reach the detection range");
  if (start_speed > g.v_max) throw GridError("grid v_max is below v_target");

  VerificationResult result;
  result.envelope = compute_safe_envelope(p, g);
  std::vector<std::int64_t> required = required_gaps(p, g.v_max);

  bool safe_region_ok = true;
  if (auto failure = check_closure(p, g.v_max, required, result.speeds_checked)) {
    safe_region_ok = false;
    result.reason = "closure fails at speed " + std::to_string(failure->speed) + " mm/s, gap " +
                    std::to_string(failure->gap) + " mm (" + failure->what + ")";
  } else if (required[static_cast<std::size_t>(start_speed)] > start_gap) {
    safe_region_ok = false;
    result.reason = "initial speed " + std::to_string(start_speed) + " mm/s cannot stop within the detection range";
  }

  if (safe_region_ok) {
    const auto& env = result.envelope.max_speed;
    for (std::size_t i = 0; i < env.size() && result.reason.empty(); ++i)
      if (env[i] > 0 && required[static_cast<std::size_t>(env[i])] > g.distance(i))
        result.reason = "envelope cell " + std::to_string(i) + " cannot stop in time";
    std::size_t start_cell = result.envelope.cell_of(start_gap);
    if (result.reason.empty() && env[start_cell] < start_speed)
      result.reason = "certified speed " + std::to_string(env[start_cell]) + " mm/s at range is below v_target " +
                      std::to_string(start_speed) + " mm/s";
    if (result.reason.empty()) {
      result.outcome = Outcome::Certified;
      certificate::Certificate c;
      c.producer = std::string("safecase ") + SAFECASE_VERSION;
      c.params = p;
      c.grid = g;
      c.digest = result.envelope.params_digest;
      c.envelope = env;
      result.certificate = std::move(c);
      return result;
    }
    // Every reachable state stays braking-viable; only the grid is too coarse.
    result.outcome = Outcome::NotProvable;
    return result;
  }

  std::vector<std::int64_t> starts{start_speed};
  for (std::int64_t v = (start_speed / g.v_step) * g.v_step; v >= 0; v -= g.v_step)
    if (v != start_speed) starts.push_back(v);
  std::size_t budget = options.max_states;
  for (bool full : {false, true}) {
    const auto moves = choices(p, full);
    for (std::int64_t v : starts) {
      VehicleState initial{0, v, start_gap, false};
      if (auto c = search_from(initial, p, moves, options, budget, result.states_explored)) {
        result.outcome = Outcome::Falsified;
        result.counterexample = std::move(c);
        return result;
      }
    }
  }
  result.outcome = Outcome::NotProvable;
  return result;
}

ReplayResult replay_trace(const Counterexample& c, const ScenarioParams& p) {
  ReplayResult r;
  VehicleState s = c.initial;
  r.states.push_back(s);
  for (std::size_t k = 0; k < c.disturbances.size(); ++k) {
    scenario::StepResult step = scenario::closed_loop_step(s, c.disturbances[k], p);
    if (step.collided && !r.collided) {
      r.collided = true;
      r.step = k + 1;
      r.impact_speed = scenario::crossing_speed(s, step.areq + c.disturbances[k].act_err);
    }
    s = step.next;
    r.states.push_back(s);
  }
  return r;
}

bool replay(const Counterexample& c, const ScenarioParams& p) {
  ReplayResult r = replay_trace(c, p);
  return r.collided && r.step == c.collision_step;
}

std::string render_report(const VerificationResult& r, const ScenarioParams& p) {
  std::ostringstream os;
  os << "verdict: " << to_string(r.outcome) << "\n";
  os << "controller: " << scenario::to_string(p.controller) << "\n";
  os << "speeds checked: " << r.speeds_checked << "\n";
  const auto& env = r.envelope.max_speed;
  if (!env.empty()) {
    std::size_t cell = r.envelope.cell_of(std::min(p.range.floor(), r.envelope.grid.d_max));
    os << "certified speed at range: " << config::render_quantity(env[cell], config::Dimension::Speed) << "\n";
  }
  if (!r.reason.empty()) os << "reason: " << r.reason << "\n";
  if (r.counterexample) {
    const Counterexample& c = *r.counterexample;
    os << "counterexample: initial speed " << config::render_quantity(c.initial.v, config::Dimension::Speed)
       << ", gap " << config::render_quantity(c.initial.xp - c.initial.x, config::Dimension::Length)
       << ", collision at step " << c.collision_step << ", impact speed "
       << config::render_quantity(c.impact_speed, config::Dimension::Speed) << "\n";
    os << "states explored: " << r.states_explored << "\n";
  }
  return os.str();
}

}  // namespace safecase::verifier
