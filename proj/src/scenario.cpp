#include "safecase/scenario.hpp"

#include <algorithm>

namespace safecase::scenario {

namespace {

const Rational kHalf(1, 2);

}  // namespace

std::string_view to_string(ControllerKind kind) {
  return kind == ControllerKind::Standard ? "standard" : "ignore-epsilon";
}

void ScenarioParams::validate() const {
  if (a_min.sign() >= 0) throw ScenarioError("a_min must be negative");
  if (a_max.sign() <= 0) throw ScenarioError("a_max must be positive");
  if (delta.sign() < 0) throw ScenarioError("delta must not be negative");
  if (abs(a_min) <= delta) throw ScenarioError("|a_min| must exceed delta");
  if (epsilon.sign() < 0) throw ScenarioError("epsilon must not be negative");
  if (T.sign() <= 0) throw ScenarioError("T must be positive");
  if (margin.sign() < 0) throw ScenarioError("margin must not be negative");
  if (range <= margin) throw ScenarioError("range must exceed margin");
  if (v_target.sign() < 0) throw ScenarioError("v_target must not be negative");
  if (vp_max.sign() < 0) throw ScenarioError("vp_max must not be negative");
}

Rational effective_deceleration(const ScenarioParams& p) {
  Rational b = abs(p.a_min) - p.delta;
  if (b.sign() <= 0) throw ScenarioError("no effective braking: |a_min| <= delta");
  return b;
}

std::int64_t stopping_distance(const Rational& v, const ScenarioParams& p) {
  Rational b = effective_deceleration(p);
  Rational reaction = v * p.T + kHalf * p.a_max * p.T * p.T;
  Rational vr = max(Rational(0), v + p.a_max * p.T);
  return (reaction + vr * vr / (b * 2)).ceil();
}

Rational stopping_travel(const Rational& v, const Rational& t, const ScenarioParams& p) {
  if (t <= p.T) return v * t + kHalf * p.a_max * t * t;
  Rational b = effective_deceleration(p);
  Rational vr = v + p.a_max * p.T;
  Rational tb = min(t - p.T, vr / b);
  return v * p.T + kHalf * p.a_max * p.T * p.T + vr * tb - kHalf * b * tb * tb;
}

std::int64_t impact_speed(const Rational& v, const Rational& d, const ScenarioParams& p) {
  if (Rational(stopping_distance(v, p)) <= d) return 0;
  Rational reaction = v * p.T + kHalf * p.a_max * p.T * p.T;
  if (d <= reaction) return ceil_sqrt(v * v + p.a_max * d * 2);
  Rational b = effective_deceleration(p);
  Rational vr = v + p.a_max * p.T;
  return ceil_sqrt(max(Rational(0), vr * vr - b * (d - reaction) * 2));
}

SensorReading sense(const VehicleState& s, std::int64_t sensor_err) {
  SensorReading r;
  r.xp_hat = s.xp + sensor_err;
  if (s.xp >= s.x) r.xp_hat = std::max(r.xp_hat, s.x);
  return r;
}

std::int64_t available_distance(const SensorReading& r, std::int64_t x, const ScenarioParams& p) {
  Rational d = Rational(r.xp_hat - x) - p.margin;
  if (p.controller == ControllerKind::Standard) d -= p.epsilon;
  return d.floor();
}

bool safe_predicate(const SensorReading& r, std::int64_t v, std::int64_t x, const ScenarioParams& p) {
  return stopping_distance(v, p) <= available_distance(r, x, p);
}

Rational controller(const SensorReading& r, std::int64_t v, std::int64_t x, const ScenarioParams& p) {
  if (!safe_predicate(r, v, x, p)) {
    if (p.pass_option) {
      Rational min_travel = Rational(v) * p.T + kHalf * (p.a_max - p.delta) * p.T * p.T;
      if (Rational(x) + min_travel > Rational(r.xp_hat) + p.epsilon) return p.a_max;
    }
    return p.a_min;
  }
  Rational cruise = (p.v_target - Rational(v)) * kCruiseGain;
  return std::clamp(cruise, p.a_min, p.a_max);
}

VehicleState plant_step(const VehicleState& s, const Rational& areq, const Disturbance& d,
                        const ScenarioParams& p) {
  if (areq < p.a_min || areq > p.a_max) throw ScenarioError("areq " + areq.to_string() + " outside [a_min, a_max]");
  if (abs(d.act_err) > p.delta) throw ScenarioError("act_err " + d.act_err.to_string() + " exceeds delta");
  if (s.v < 0) throw ScenarioError("negative vehicle speed");
  Rational a = areq + d.act_err;
  VehicleState n = s;
  n.v = std::max<std::int64_t>(0, (Rational(s.v) + a * p.T).ceil());
  n.x = s.x + (Rational(s.v + n.v) * kHalf * p.T).ceil();
  n.in_path = s.in_path || d.ped_enters;
  return n;
}

bool collision(const VehicleState& s) { return s.in_path && s.x >= s.xp && s.v > 0; }

bool collides(const VehicleState& before, const VehicleState& after) {
  return after.in_path && after.x >= after.xp && (before.v > 0 || after.v > 0);
}

StepResult closed_loop_step(const VehicleState& s, const Disturbance& d, const ScenarioParams& p) {
  if (Rational(d.sensor_err) > p.epsilon)
    throw ScenarioError("sensor_err " + std::to_string(d.sensor_err) + " exceeds epsilon");
  StepResult r;
  r.areq = controller(sense(s, d.sensor_err), s.v, s.x, p);
  r.next = plant_step(s, r.areq, d, p);
  r.collided = collides(s, r.next);
  return r;
}

std::int64_t crossing_speed(const VehicleState& before, const Rational& a) {
  Rational v(before.v);
  return ceil_sqrt(max(Rational(0), v * v + a * Rational(before.xp - before.x) * 2));
}

}  // namespace safecase::scenario
