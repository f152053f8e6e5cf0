#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "safecase/rational.hpp"

namespace safecase::scenario {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ControllerKind {
  Standard,
  /// Decides on xp_hat directly, without the epsilon correction.
  IgnoreEpsilon,
};

std::string_view to_string(ControllerKind kind);

/// Scenario parameters in base units: mm, mm/s, mm/s^2 and s.
struct ScenarioParams {
  Rational a_min;     // mm/s^2, < 0
  Rational a_max;     // mm/s^2, > 0
  Rational delta;     // mm/s^2, actuator tolerance
  Rational epsilon;   // mm, sensor overestimation bound
  Rational range;     // mm, detection range
  Rational vp_max;    // mm/s, pedestrian lateral speed bound
  Rational T;         // s, control period
  Rational margin;    // mm, standstill margin
  Rational v_target;  // mm/s, cruise set speed
  ControllerKind controller = ControllerKind::Standard;
  /// Allows the pass maneuver; never accepted by the verifier.
  bool pass_option = false;

  /// Throws ScenarioError on a_min < 0 < a_max, |a_min| > delta >= 0,
  /// epsilon >= 0, T > 0, range > margin >= 0, v_target >= 0, vp_max >= 0.
  void validate() const;

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

/// Feedback gain of the cruise law, 1/s.
inline constexpr std::int64_t kCruiseGain = 1;

struct VehicleState {
  std::int64_t x = 0;   // mm
  std::int64_t v = 0;   // mm/s
  std::int64_t xp = 0;  // mm
  bool in_path = false;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct SensorReading {
  std::int64_t xp_hat = 0;  // mm
  Rational vp_hat;          // mm/s, carried but unused by the controller
};

struct Disturbance {
  /// xp_hat - xp in mm, at most epsilon.
  std::int64_t sensor_err = 0;
  /// a - areq in mm/s^2, |act_err| <= delta.
  Rational act_err;
  /// The pedestrian steps into the path this tick.
  bool ped_enters = false;

  friend bool operator==(const Disturbance&, const Disturbance&) = default;
};

/// |a_min| - delta, in mm/s^2. Throws ScenarioError when not positive.
Rational effective_deceleration(const ScenarioParams& p);

/// Worst-case distance to standstill from speed v (mm/s): one period at
/// a_max, then braking at b_eff. Rounded up to whole mm.
std::int64_t stopping_distance(const Rational& v, const ScenarioParams& p);

/// Speed (mm/s) at which the vehicle reaches an obstacle d mm ahead when it
/// starts at v and reacts as in stopping_distance. 0 if it stops in time.
/// Rounded up.
std::int64_t impact_speed(const Rational& v, const Rational& d, const ScenarioParams& p);

/// Position reached after t seconds under the stopping_distance motion
/// profile, unrounded.
Rational stopping_travel(const Rational& v, const Rational& t, const ScenarioParams& p);

/// Reading of a sensor with error sensor_err, kept at or beyond the vehicle.
SensorReading sense(const VehicleState& s, std::int64_t sensor_err);

/// Distance the controller may use for stopping:
/// floor(xp_hat - epsilon - x - margin), epsilon dropped by IgnoreEpsilon.
std::int64_t available_distance(const SensorReading& r, std::int64_t x, const ScenarioParams& p);

/// stopping_distance(v) <= available_distance (inclusive).
bool safe_predicate(const SensorReading& r, std::int64_t v, std::int64_t x, const ScenarioParams& p);

/// a_min when not safe, otherwise clamp(k (v_target - v), a_min, a_max).
Rational controller(const SensorReading& r, std::int64_t v, std::int64_t x, const ScenarioParams& p);

/// One control period. Throws ScenarioError when areq or the disturbance is
/// out of bounds.
VehicleState plant_step(const VehicleState& s, const Rational& areq, const Disturbance& d,
                        const ScenarioParams& p);

/// in_path and x >= xp and v > 0.
bool collision(const VehicleState& s);

/// The transition from `before` to `after` hits the pedestrian: the
/// pedestrian is in the path, the vehicle reaches xp and it moves during
/// the step.
bool collides(const VehicleState& before, const VehicleState& after);

struct StepResult {
  VehicleState next;
  Rational areq;
  bool collided = false;
};

/// sense, controller and plant_step for one period.
StepResult closed_loop_step(const VehicleState& s, const Disturbance& d, const ScenarioParams& p);

/// Speed (mm/s) at which a transition that collided crossed xp, rounded up.
std::int64_t crossing_speed(const VehicleState& before, const Rational& a);

}  // namespace safecase::scenario
