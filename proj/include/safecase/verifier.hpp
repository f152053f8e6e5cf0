#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safecase/certificate.hpp"
#include "safecase/grid.hpp"
#include "safecase/scenario.hpp"

namespace safecase::verifier {

/// Per distance cell, the largest grid speed (mm/s) whose cell corner passes
/// the controller guard under the worst admissible reading.
struct SafeEnvelope {
  Grid grid;
  std::vector<std::int64_t> max_speed;
  std::string params_digest;

  std::size_t cell_of(std::int64_t distance_mm) const {
    return static_cast<std::size_t>(distance_mm / grid.d_step);
  }
};

SafeEnvelope compute_safe_envelope(const scenario::ScenarioParams& p, const Grid& g);

struct Counterexample {
  scenario::VehicleState initial;
  std::vector<scenario::Disturbance> disturbances;
  /// Number of steps until the colliding transition, inclusive.
  std::size_t collision_step = 0;
  /// Speed when crossing the pedestrian position, mm/s.
  std::int64_t impact_speed = 0;
};

enum class Outcome { Certified, Falsified, NotProvable };
std::string_view to_string(Outcome outcome);

struct SearchOptions {
  std::size_t horizon = 600;
  /// States stored over the whole search, all initial states together.
  std::size_t max_states = 3'000'000;
};

struct VerificationResult {
  Outcome outcome = Outcome::NotProvable;
  SafeEnvelope envelope;
  std::optional<certificate::Certificate> certificate;
  std::optional<Counterexample> counterexample;
  /// Why the certificate was not issued; empty when certified.
  std::string reason;
  std::size_t speeds_checked = 0;
  std::size_t states_explored = 0;
};

/// Checks closure of the braking-viable set for every integer speed up to
/// v_max, the envelope against it and the initial states against the
/// envelope. On failure runs a breadth-first adversarial search from the
/// initial states. Throws scenario::ScenarioError for params with the pass
/// option and GridError when the grid does not cover the detection range.
VerificationResult verify_closed_loop(const scenario::ScenarioParams& p, const Grid& g,
                                      const SearchOptions& options = {});

struct ReplayResult {
  bool collided = false;
  /// 1-based step of the first colliding transition, 0 if none.
  std::size_t step = 0;
  std::int64_t impact_speed = 0;
  std::vector<scenario::VehicleState> states;
};

/// Re-simulates the trace with scenario primitives. Throws
/// scenario::ScenarioError when a disturbance is out of bounds.
ReplayResult replay_trace(const Counterexample& c, const scenario::ScenarioParams& p);

/// True iff the first collision happens exactly at c.collision_step.
bool replay(const Counterexample& c, const scenario::ScenarioParams& p);

std::string render_report(const VerificationResult& r, const scenario::ScenarioParams& p);

}  // namespace safecase::verifier
