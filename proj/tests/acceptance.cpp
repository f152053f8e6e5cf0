// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "safecase/capability.hpp"
#include "safecase/casefile.hpp"
#include "safecase/certificate.hpp"
#include "safecase/config.hpp"
#include "safecase/gsn.hpp"
#include "safecase/qrn.hpp"
#include "safecase/tabfile.hpp"
#include "safecase/verifier.hpp"

using namespace safecase;
using scenario::ScenarioParams;

namespace {

std::string fixture(const std::string& name) { return std::string(SAFECASE_FIXTURES) + "/" + name; }

struct Check {
  bool ok = true;
  std::string detail;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(int id, const char* name, double limit_ms, const std::function<void(Check&)>& body) {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = std::string("exception: ") + e.what();
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  bool in_time = ms < limit_ms;
  bool pass = c.ok && in_time;
  failures += !pass;
  std::printf("%s %d %s (%.3f ms, limit %.0f ms)%s%s\n", pass ? "PASS" : "FAIL", id, name, ms, limit_ms,
              c.ok ? (in_time ? "" : ": too slow") : ": ", c.ok ? "" : c.detail.c_str());
  std::fflush(stdout);
}

ScenarioParams desk() { return config::load_scenario(fixture("scenario.cfg")); }
verifier::Grid desk_grid() { return verifier::parse_grid(read_file(fixture("grid.cfg"))); }

// Impact speed at an obstacle d mm ahead under the worst-case stop, from
// the kinematics: squared speed at the obstacle, then rounded up.
std::int64_t oracle_impact(const ScenarioParams& p, const Rational& v, const Rational& d, const Rational& entry) {
  const Rational T = p.T, a = p.a_max, b = abs(p.a_min) - p.delta;
  const Rational reaction = v * T + Rational(1, 2) * a * T * T;
  const Rational vr = v + a * T;
  const Rational stop = reaction + vr * vr / (b * Rational(2));
  if (Rational(stop.ceil()) <= d) return 0;
  Rational v2 = d <= reaction ? v * v + Rational(2) * a * d : vr * vr - Rational(2) * b * (d - reaction);
  if (v2.sign() <= 0) return 0;
  if (entry.sign() > 0) {
    Rational pos;
    if (entry <= T) {
      pos = v * entry + Rational(1, 2) * a * entry * entry;
    } else {
      Rational tb = min(entry - T, vr / b);
      pos = reaction + vr * tb - Rational(1, 2) * b * tb * tb;
    }
    if (pos > d) return 0;
  }
  return ceil_sqrt(v2);
}

}  // namespace

int main() {
  const qrn::RiskNormTable norms = qrn::RiskNormTable::parse(read_file(fixture("risk_norms.tbl")));
  const qrn::ExposureTable exposure = qrn::ExposureTable::parse(read_file(fixture("exposure.tbl")));

  criterion(1, "impact budget from urban-50 exposure and the lowest band norm", 1, [&](Check& c) {
    Rational e = exposure.find(qrn::RoadType::Urban, Rational(50)).exposure_hours;
    Rational n = norms.rows[0].norm_hours;
    Rational b = qrn::impact_budget(e, n);
    c.expect(e == Rational(1000) && n == Rational(100000), "table values");
    c.expect(b == Rational(1, 100), "budget " + b.to_string());
  });

  criterion(2, "60 km/h rejected by mean time 200000 h against 1000000 h", 1, [&](Check& c) {
    qrn::MeanTime t = qrn::mean_time_between(Rational(10000), Rational(5, 100));
    c.expect(!t.infinite() && *t.hours == Rational(200000), "mean time " + t.to_string());
    qrn::CapabilityTable cap;
    cap.bands = {qrn::SpeedBand{Rational(10), Rational(20)}};
    cap.by_speed[Rational(60)] = {Rational(5, 100)};
    qrn::ExposureTable::Row row{qrn::RoadType::Urban, Rational(70), Rational(10000)};
    qrn::AdmissibilityResult r = qrn::admissible_speeds(cap, row, norms, std::vector<Rational>{Rational(60)});
    c.expect(r.verdicts.size() == 1 && !r.verdicts[0].admissible, "60 km/h admitted");
    c.expect(r.verdicts[0].violated_band == std::optional<std::size_t>(1), "wrong band");
  });

  criterion(3, "component allocation against the 0.01 budget", 1, [&](Check& c) {
    qrn::Allocation ok{Rational(1, 100),
                       {{"sense", Rational(5, 1000)}, {"ctrl", Rational(0)}, {"act", Rational(5, 1000)}}};
    qrn::AllocationVerdict v = qrn::check_allocation(ok);
    c.expect(v.pass && v.total == Rational(1, 100), "balanced allocation failed");
    qrn::Allocation over{Rational(1, 100),
                         {{"sense", Rational(6, 1000)}, {"ctrl", Rational(0)}, {"act", Rational(5, 1000)}}};
    qrn::AllocationVerdict w = qrn::check_allocation(over);
    c.expect(!w.pass && w.excess == Rational(1, 1000), "excess " + w.excess.to_string());
  });

  criterion(4, "pedestrian case parses, validates and exports deterministically", 100, [&](Check& c) {
    std::string text = read_file(fixture("fig4.case"));
    casefile::ParseResult r = casefile::parse_casefile(text);
    c.expect(r.ok(), r.ok() ? "" : casefile::format_error(r.errors.front()));
    c.expect(gsn::validate_structure(r.structure).ok(), "validation");
    c.expect(r.structure.nodes.size() == 23 && r.structure.edges.size() == 25, "node or edge count");
    std::vector<std::string> expected{"G-act", "G-ctrl", "G-sense", "S-exposure-continuation", "S1-continuation"};
    c.expect(gsn::undeveloped_report(r.structure) == expected, "undeveloped report");
    casefile::ParseResult again = casefile::parse_casefile(text);
    c.expect(casefile::render_dot(r.structure) == casefile::render_dot(again.structure), "dot differs");
    std::string json = casefile::render_json(r.structure);
    c.expect(json == casefile::render_json(again.structure), "json differs");
    c.expect(casefile::parse_json(json) == r.structure, "json round trip");
    c.expect(casefile::render_json(casefile::parse_json(json)) == json, "json re-export");
  });

  criterion(5, "desk scenario certified, 100000 random traces collision free, certificate valid", 300'000,
            [&](Check& c) {
    ScenarioParams p = desk();
    verifier::VerificationResult r = verifier::verify_closed_loop(p, desk_grid());
    c.expect(r.outcome == verifier::Outcome::Certified && r.certificate, "not certified: " + r.reason);
    if (!r.certificate) return;
    certificate::CheckVerdict v =
        certificate::check_certificate_bytes(certificate::encode(*r.certificate), p);
    c.expect(v.valid, "certificate " + v.code + ": " + v.message);

    const std::int64_t eps = p.epsilon.floor();
    const std::int64_t delta = p.delta.floor();
    const std::int64_t v_target = p.v_target.floor();
    std::size_t collisions = 0, traces = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::int64_t> act(-delta, delta);
      std::uniform_int_distribution<std::int64_t> sensor(-eps, eps);
      std::uniform_int_distribution<std::int64_t> speed(0, v_target);
      for (std::size_t trace = 0; trace < 1000; ++trace, ++traces) {
        const std::size_t entry = trace % 600;
        scenario::VehicleState s{0, speed(rng), p.range.floor(), false};
        for (std::size_t tick = 0; tick < 600; ++tick) {
          scenario::Disturbance d{sensor(rng), Rational(act(rng)), tick == entry};
          scenario::StepResult step = scenario::closed_loop_step(s, d, p);
          if (step.collided) {
            ++collisions;
            break;
          }
          s = step.next;
        }
      }
    }
    c.expect(traces == 100'000, "trace count");
    c.expect(collisions == 0, std::to_string(collisions) + " collisions");
  });

  criterion(6, "broken controller falsified, fixed controller survives the same trace", 60'000, [&](Check& c) {
    ScenarioParams broken = config::load_scenario(fixture("broken.cfg"));
    verifier::VerificationResult r = verifier::verify_closed_loop(broken, desk_grid());
    c.expect(r.outcome == verifier::Outcome::Falsified && r.counterexample, "no counterexample: " + r.reason);
    if (!r.counterexample) return;
    verifier::ReplayResult bad = verifier::replay_trace(*r.counterexample, broken);
    c.expect(verifier::replay(*r.counterexample, broken), "replay disagrees");
    c.expect(bad.collided && bad.impact_speed > 0, "no impact on replay");
    verifier::ReplayResult good = verifier::replay_trace(*r.counterexample, desk());
    c.expect(!good.collided, "fixed controller collides");
  });

  criterion(7, "every upward single-cell mutation of the certificate is rejected", 120'000, [&](Check& c) {
    ScenarioParams p = desk();
    certificate::Certificate cert = certificate::decode(read_file(fixture("desk.cert")));
    c.expect(certificate::check_certificate(cert, p).valid, "fixture certificate invalid");
    for (std::size_t i = 0; i < cert.envelope.size(); ++i) {
      certificate::Certificate t = cert;
      t.envelope[i] += cert.grid.v_step;
      certificate::CheckVerdict v = certificate::check_certificate_bytes(certificate::encode(t), p);
      bool rejected = !v.valid && (v.code == certificate::codes::kClosureFail ||
                                   v.code == certificate::codes::kCollision);
      c.expect(rejected, "cell " + std::to_string(i) + " accepted or misreported (" + v.code + ")");
    }
    c.expect(cert.envelope.size() == 201, "cell count");
  });

  criterion(8, "certified speeds nonincreasing in epsilon and delta", 600'000, [&](Check& c) {
    const std::int64_t eps[] = {0, 250, 500};
    const std::int64_t del[] = {0, 250, 500};
    std::vector<std::int64_t> env[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        ScenarioParams p = desk();
        p.epsilon = Rational(eps[i]);
        p.delta = Rational(del[j]);
        verifier::VerificationResult r = verifier::verify_closed_loop(p, desk_grid());
        c.expect(r.outcome == verifier::Outcome::Certified,
                 "eps " + std::to_string(eps[i]) + " delta " + std::to_string(del[j]) + ": " + r.reason);
        env[i][j] = r.envelope.max_speed;
      }
    std::size_t violations = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < env[i][j].size(); ++k) {
          if (i + 1 < 3 && env[i + 1][j][k] > env[i][j][k]) ++violations;
          if (j + 1 < 3 && env[i][j + 1][k] > env[i][j][k]) ++violations;
        }
    c.expect(violations == 0, std::to_string(violations) + " violations");
  });

  criterion(9, "impact distribution equals the per-incident oracle on a 200-point grid", 60'000, [&](Check& c) {
    ScenarioParams p = desk();
    for (const char* file : {"incidents.tbl", "incidents_offsets.tbl"}) {
      capability::IncidentModel m = capability::parse_incidents(read_file(fixture(file)));
      c.expect(m.distances.size() == 200, "grid size");
      std::vector<capability::Weighted> entries{{Rational(0), Rational(1)}};
      if (m.timing == capability::Timing::Offsets) {
        entries.clear();
        for (const auto& o : m.offsets) entries.push_back({o.value / p.vp_max, o.weight});
      }
      for (int kmh = 0; kmh <= 120; kmh += 10) {
        capability::Distribution got = capability::impact_distribution(p, Rational(kmh), m, norms);
        std::vector<Rational> mass(norms.rows.size(), Rational(0));
        Rational none(0), total = got.no_impact;
        Rational v = Rational(kmh) * Rational(1000) / Rational(36, 10);
        for (const auto& d : m.distances)
          for (const auto& e : entries) {
            std::int64_t s = oracle_impact(p, v, d.value, e.value);
            Rational w = d.weight * e.weight;
            if (s == 0) {
              none += w;
            } else {
              mass[*norms.band_of(Rational(s) * Rational(36, 10) / Rational(1000))] += w;
            }
          }
        for (const Rational& r : got.band_mass) total += r;
        c.expect(got.band_mass == mass && got.no_impact == none,
                 std::string(file) + " at " + std::to_string(kmh) + " km/h differs");
        c.expect(total == Rational(1), std::string(file) + " mass " + total.to_string());
      }
    }
  });

  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
