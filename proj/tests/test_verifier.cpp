#include <gtest/gtest.h>

#include "safecase/config.hpp"
#include "safecase/verifier.hpp"
#include "test_support.hpp"

using namespace safecase::verifier;
using namespace safecase::scenario;
using safecase::Rational;
using safecase::testing::desk_grid;
using safecase::testing::desk_params;
using safecase::testing::fixture;
using safecase::testing::fixture_text;

namespace {

ScenarioParams broken_params() { return safecase::config::load_scenario(fixture("broken.cfg")); }

const VerificationResult& broken_result() {
  static const VerificationResult r = verify_closed_loop(broken_params(), desk_grid());
  return r;
}

}  // namespace

TEST(Grid, ParsesAndRenders) {
  Grid g = desk_grid();
  EXPECT_EQ(g, (Grid{100'000, 500, 35'000, 250}));
  EXPECT_EQ(g.cells(), 201u);
  EXPECT_EQ(parse_grid(render_grid(g)), g);
  EXPECT_EQ(parse_grid("d_max=40 m, d_step=0.5 m, v_max=36 m/s, v_step=12 m/s"), (Grid{40'000, 500, 36'000, 12'000}));
  EXPECT_THROW(parse_grid("d_max=40 m, d_step=0.3 m, v_max=36 m/s, v_step=12 m/s"), GridError);
  EXPECT_THROW(parse_grid("d_max=40 m, d_step=0.5 m, v_max=36 m/s"), GridError);
  EXPECT_THROW(parse_grid("d_max=40 m, d_step=0.5 m, v_max=36 m/s, v_step=12 m/s, x=1 m"), GridError);
  EXPECT_THROW(parse_grid("d_max=40, d_step=0.5 m, v_max=36 m/s, v_step=12 m/s"), GridError);
  EXPECT_THROW(parse_grid("d_max=40 m, d_step=0.0005 m, v_max=36 m/s, v_step=12 m/s"), GridError);
}

TEST(Envelope, MatchesBruteForce) {
  ScenarioParams p = desk_params();
  Grid g{30'000, 250, 20'000, 125};
  SafeEnvelope env = compute_safe_envelope(p, g);
  ASSERT_EQ(env.max_speed.size(), g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) {
    std::int64_t avail = (Rational(g.distance(i)) - p.margin - p.epsilon).floor();
    std::int64_t best = 0;
    for (std::int64_t v = 0; v <= g.v_max; v += g.v_step)
      if (stopping_distance(Rational(v), p) <= avail) best = v;
    EXPECT_EQ(env.max_speed[i], best) << "cell " << i;
  }
}

TEST(Envelope, ClosedFormWithoutReactionTime) {
  // b_eff = 5 m/s^2, no reaction, no margins: 10 m stops exactly 10 m/s.
  ScenarioParams p = desk_params();
  p.a_min = Rational(-5500);
  p.T = Rational(0);
  p.margin = Rational(0);
  p.epsilon = Rational(0);
  SafeEnvelope env = compute_safe_envelope(p, Grid{20'000, 10'000, 30'000, 1000});
  EXPECT_EQ(env.max_speed[0], 0);
  EXPECT_EQ(env.max_speed[1], 10'000);
  EXPECT_EQ(env.max_speed[2], 14'000);
}

TEST(Envelope, IsMonotoneInDistance) {
  SafeEnvelope env = compute_safe_envelope(desk_params(), desk_grid());
  for (std::size_t i = 1; i < env.max_speed.size(); ++i) EXPECT_LE(env.max_speed[i - 1], env.max_speed[i]);
  EXPECT_EQ(env.cell_of(100'000), 200u);
  EXPECT_EQ(env.cell_of(749), 1u);
}

TEST(Verify, DeskScenarioIsCertified) {
  ScenarioParams p = desk_params();
  VerificationResult r = verify_closed_loop(p, desk_grid());
  ASSERT_EQ(r.outcome, Outcome::Certified) << r.reason;
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_FALSE(r.counterexample.has_value());
  EXPECT_EQ(r.speeds_checked, 35'001u);
  EXPECT_EQ(r.certificate->envelope, r.envelope.max_speed);
  EXPECT_GE(r.envelope.max_speed[200], p.v_target.floor());
  EXPECT_EQ(r.certificate->params, p);
  EXPECT_NE(render_report(r, p).find("verdict: CERTIFIED"), std::string::npos);
}

TEST(Verify, StandingStillIsCertified) {
  ScenarioParams p = desk_params();
  p.v_target = Rational(0);
  VerificationResult r = verify_closed_loop(p, desk_grid());
  EXPECT_EQ(r.outcome, Outcome::Certified) << r.reason;
}

TEST(Verify, BrokenControllerHasAReplayableCounterexample) {
  ScenarioParams p = broken_params();
  const VerificationResult& r = broken_result();
  ASSERT_EQ(r.outcome, Outcome::Falsified) << r.reason;
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_FALSE(r.certificate.has_value());
  const Counterexample& c = *r.counterexample;
  EXPECT_EQ(c.disturbances.size(), c.collision_step);
  EXPECT_EQ(c.initial.xp - c.initial.x, p.range.floor());
  EXPECT_LE(c.initial.v, p.v_target.floor());
  EXPECT_TRUE(c.disturbances.front().ped_enters);
  for (const Disturbance& d : c.disturbances) {
    EXPECT_LE(Rational(d.sensor_err), p.epsilon);
    EXPECT_LE(abs(d.act_err), p.delta);
  }
  EXPECT_TRUE(replay(c, p));
  ReplayResult rr = replay_trace(c, p);
  EXPECT_EQ(rr.step, c.collision_step);
  EXPECT_EQ(rr.impact_speed, c.impact_speed);
  EXPECT_GT(c.impact_speed, 0);
  EXPECT_EQ(rr.states.size(), c.disturbances.size() + 1);
  EXPECT_NE(render_report(r, p).find("COUNTEREXAMPLE"), std::string::npos);
}

TEST(Verify, TruncatedTraceDoesNotReplay) {
  ScenarioParams p = broken_params();
  Counterexample c = *broken_result().counterexample;
  c.disturbances.pop_back();
  EXPECT_FALSE(replay(c, p));
  EXPECT_FALSE(replay_trace(c, p).collided);
  Counterexample shifted = *broken_result().counterexample;
  shifted.collision_step += 1;
  EXPECT_FALSE(replay(shifted, p));
}

TEST(Verify, StandardControllerSurvivesTheSameDisturbances) {
  ScenarioParams p = desk_params();
  Counterexample c = *broken_result().counterexample;
  for (int extra = 0; extra < 200; ++extra) c.disturbances.push_back(Disturbance{0, p.delta, false});
  ReplayResult rr = replay_trace(c, p);
  EXPECT_FALSE(rr.collided);
  EXPECT_EQ(rr.states.back().v, 0);
}

TEST(Verify, ExhaustedBudgetIsNotProvable) {
  VerificationResult r = verify_closed_loop(broken_params(), desk_grid(), SearchOptions{600, 0});
  EXPECT_EQ(r.outcome, Outcome::NotProvable);
  EXPECT_FALSE(r.reason.empty());
}

TEST(Verify, CoarseGridIsNotProvableAndRefinementCertifies) {
  ScenarioParams p = safecase::config::load_scenario(fixture("coarse_scenario.cfg"));
  VerificationResult coarse = verify_closed_loop(p, parse_grid(fixture_text("coarse_grid.cfg")));
  EXPECT_EQ(coarse.outcome, Outcome::NotProvable);
  EXPECT_FALSE(coarse.certificate.has_value());
  EXPECT_FALSE(coarse.counterexample.has_value());
  EXPECT_NE(coarse.reason.find("below v_target"), std::string::npos) << coarse.reason;
  VerificationResult fine = verify_closed_loop(p, parse_grid(fixture_text("fine_grid.cfg")));
  EXPECT_EQ(fine.outcome, Outcome::Certified) << fine.reason;
}

TEST(Verify, RejectsUnverifiableInputs) {
  ScenarioParams p = desk_params();
  p.pass_option = true;
  EXPECT_THROW(verify_closed_loop(p, desk_grid()), ScenarioError);
  ScenarioParams far = desk_params();
  far.range = Rational(150'000);
  EXPECT_THROW(verify_closed_loop(far, desk_grid()), GridError);
  ScenarioParams fast = desk_params();
  fast.v_target = Rational(40'000);
  EXPECT_THROW(verify_closed_loop(fast, desk_grid()), GridError);
}

TEST(Verify, OutcomeNames) {
  EXPECT_EQ(to_string(Outcome::Certified), "CERTIFIED");
  EXPECT_EQ(to_string(Outcome::Falsified), "COUNTEREXAMPLE");
  EXPECT_EQ(to_string(Outcome::NotProvable), "NOT_PROVABLE_AT_GRID");
}
