#include "safecase/capability.hpp"

#include <sstream>

#include "safecase/config.hpp"

namespace safecase::capability {

namespace {

Rational total(const std::vector<Weighted>& list) {
  Rational sum;
  for (const Weighted& w : list) sum += w.weight;
  return sum;
}

void require_distribution(const std::vector<Weighted>& list, const std::string& what) {
  if (list.empty()) throw CapabilityError(what + " list is empty");
  for (const Weighted& w : list) {
    if (w.weight.sign() < 0) throw CapabilityError(what + " weight " + w.weight.to_string() + " is negative");
    if (w.value.sign() < 0) throw CapabilityError(what + " " + w.value.to_string() + " mm is negative");
  }
  if (Rational sum = total(list); sum != Rational(1))
    throw CapabilityError(what + " weights sum to " + sum.to_string() + ", not 1");
}

}  // namespace

void IncidentModel::validate() const {
  require_distribution(distances, "distance");
  if (timing == Timing::Offsets) require_distribution(offsets, "offset");
}

std::vector<Weighted> uniform_grid(std::size_t count, const Rational& from, const Rational& to) {
  if (count == 0) throw CapabilityError("uniform grid needs at least one point");
  if (to < from) throw CapabilityError("uniform grid bounds are reversed");
  std::vector<Weighted> points;
  Rational weight(1, static_cast<std::int64_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    Rational value = count == 1 ? from
                                : from + (to - from) * Rational(static_cast<std::int64_t>(i),
                                                                static_cast<std::int64_t>(count - 1));
    points.push_back(Weighted{value, weight});
  }
  return points;
}

IncidentModel parse_incidents(std::string_view text) {
  IncidentModel m;
  bool timing_seen = false;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::istringstream words(raw);
    std::vector<std::string> w;
    for (std::string s; words >> s;) w.push_back(s);
    if (w.empty()) continue;
    auto fail = [&](const std::string& msg) {
      return CapabilityError("line " + std::to_string(line_no) + ": " + msg);
    };
    try {
      if (w[0] == "timing") {
        if (w.size() != 3 || w[1] != "=") throw fail("expected 'timing = adversarial|offsets'");
        if (timing_seen) throw fail("timing given twice");
        timing_seen = true;
        if (w[2] == "adversarial") {
          m.timing = Timing::Adversarial;
        } else if (w[2] == "offsets") {
          m.timing = Timing::Offsets;
        } else {
          throw fail("unknown timing '" + w[2] + "'");
        }
      } else if (w[0] == "distance" || w[0] == "offset") {
        if (w.size() != 4) throw fail("expected '" + w[0] + " <value> <unit> <weight>'");
        Weighted item{config::parse_quantity(w[1] + " " + w[2], config::Dimension::Length), Rational::parse(w[3])};
        (w[0] == "distance" ? m.distances : m.offsets).push_back(item);
      } else if (w[0] == "uniform") {
        if (w.size() != 5) throw fail("expected 'uniform <count> <from> <to> <unit>'");
        Rational count = Rational::parse(w[1]);
        if (!count.is_integer() || count.sign() <= 0 || count > Rational(1'000'000))
          throw fail("uniform count must be a positive integer");
        auto points = uniform_grid(static_cast<std::size_t>(count.num()),
                                   config::parse_quantity(w[2] + " " + w[4], config::Dimension::Length),
                                   config::parse_quantity(w[3] + " " + w[4], config::Dimension::Length));
        m.distances.insert(m.distances.end(), points.begin(), points.end());
      } else {
        throw fail("unknown row '" + w[0] + "'");
      }
    } catch (const CapabilityError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (m.timing == Timing::Adversarial && !m.offsets.empty())
    throw CapabilityError("offset rows need 'timing = offsets'");
  m.validate();
  return m;
}

Rational to_kmh(const Rational& mm_per_s) { return mm_per_s * Rational(9, 2500); }
Rational from_kmh(const Rational& kmh) { return kmh * Rational(2500, 9); }

std::int64_t incident_impact(const scenario::ScenarioParams& p, const Rational& v0, const Rational& d,
                             const Rational& entry) {
  std::int64_t speed = scenario::impact_speed(v0, d, p);
  if (speed == 0 || entry.sign() <= 0) return speed;
  // The vehicle is past the crossing point before the pedestrian arrives.
  if (scenario::stopping_travel(v0, entry, p) > d) return 0;
  return speed;
}

Distribution impact_distribution(const scenario::ScenarioParams& p, const Rational& v0_kmh, const IncidentModel& m,
                                 const qrn::RiskNormTable& bands) {
  if (v0_kmh.sign() < 0) throw CapabilityError("initial speed must not be negative");
  m.validate();
  bands.require_full_cover();
  std::vector<Weighted> entries{{0, 1}};
  if (m.timing == Timing::Offsets) {
    entries.clear();
    for (const Weighted& o : m.offsets) {
      if (o.value.is_zero()) {
        entries.push_back(Weighted{0, o.weight});
      } else if (p.vp_max.is_zero()) {
        entries.push_back(Weighted{-1, o.weight});  // never enters
      } else {
        entries.push_back(Weighted{o.value / p.vp_max, o.weight});
      }
    }
  }

  Rational v0 = from_kmh(v0_kmh);
  Distribution dist;
  dist.band_mass.assign(bands.rows.size(), Rational(0));
  for (const Weighted& d : m.distances) {
    for (const Weighted& e : entries) {
      Rational w = d.weight * e.weight;
      std::int64_t speed = e.value.sign() < 0 ? 0 : incident_impact(p, v0, d.value, e.value);
      if (speed == 0) {
        dist.no_impact += w;
        continue;
      }
      dist.band_mass[*bands.band_of(to_kmh(speed))] += w;
    }
  }
  return dist;
}

qrn::CapabilityTable capability_table(const scenario::ScenarioParams& p, const std::vector<Rational>& speeds_kmh,
                                      const IncidentModel& m, const qrn::RiskNormTable& bands) {
  bands.require_full_cover();
  qrn::CapabilityTable table;
  for (const auto& row : bands.rows) table.bands.push_back(row.band);
  for (const Rational& v : speeds_kmh) table.by_speed[v] = impact_distribution(p, v, m, bands).band_mass;
  return table;
}

}  // namespace safecase::capability
