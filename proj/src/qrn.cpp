#include "safecase/qrn.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "safecase/tabfile.hpp"

namespace safecase::qrn {

namespace {

Rational number(const TabSection& s, std::string_view key) {
  try {
    return Rational::parse(s.get(key));
  } catch (const TextFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw TextFormatError(s.line_of(key), std::string(key) + ": " + e.what());
  }
}

void require_probability(const Rational& p, const std::string& what) {
  if (p < Rational(0) || p > Rational(1))
    throw QrnError(what + " = " + p.to_string() + " is not a probability in [0, 1]");
}

}  // namespace

std::string SpeedBand::label() const {
  return "[" + lower.to_string() + ", " + (upper ? upper->to_string() : std::string("inf")) + ")";
}

SpeedBand SpeedBand::parse(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s.push_back(c);
  if (s.size() < 5 || s.front() != '[' || s.back() != ')')
    throw QrnError("band '" + std::string(text) + "' must look like [lo, hi) or [lo, inf)");
  auto comma = s.find(',');
  if (comma == std::string::npos) throw QrnError("band '" + std::string(text) + "' is missing ','");
  SpeedBand band;
  band.lower = Rational::parse(s.substr(1, comma - 1));
  std::string hi = s.substr(comma + 1, s.size() - comma - 2);
  if (hi != "inf") band.upper = Rational::parse(hi);
  if (band.upper && !(band.lower < *band.upper)) throw QrnError("band '" + std::string(text) + "' is empty");
  return band;
}

void RiskNormTable::validate() const {
  if (rows.empty()) throw QrnError("risk norm table is empty");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (r.norm_hours <= Rational(0)) throw QrnError("risk norm for " + r.band.label() + " must be positive");
    if (r.band.upper && !(r.band.lower < *r.band.upper)) throw QrnError("band " + r.band.label() + " is empty");
    if (i + 1 < rows.size()) {
      if (!r.band.upper) throw QrnError("open band " + r.band.label() + " must be the last one");
      if (*r.band.upper != rows[i + 1].band.lower)
        throw QrnError("bands " + r.band.label() + " and " + rows[i + 1].band.label() + " are not contiguous");
    }
  }
}

void RiskNormTable::require_full_cover() const {
  validate();
  if (rows.front().band.lower != Rational(0) || rows.back().band.upper)
    throw QrnError("risk norm bands must cover [0, inf)");
}

std::optional<std::size_t> RiskNormTable::band_of(const Rational& kmh) const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].band.contains(kmh)) return i;
  return std::nullopt;
}

std::optional<std::size_t> RiskNormTable::find_band(const SpeedBand& band) const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].band == band) return i;
  return std::nullopt;
}

RiskNormTable RiskNormTable::parse(std::string_view text) {
  RiskNormTable t;
  for (const TabSection& s : parse_tabfile(text)) {
    if (s.name != "risk_norm") throw TextFormatError(s.line, "unexpected section [" + s.name + "]");
    try {
      t.rows.push_back(Row{SpeedBand::parse(s.get("impact_speed_kmh")), number(s, "norm_h")});
    } catch (const QrnError& e) {
      throw TextFormatError(s.line, e.what());
    }
  }
  t.validate();
  return t;
}

std::string RiskNormTable::render() const {
  std::ostringstream os;
  for (const Row& r : rows)
    os << (os.tellp() > 0 ? "\n" : "") << "[risk_norm]\nimpact_speed_kmh = " << r.band.label()
       << "\nnorm_h = " << r.norm_hours << "\n";
  return os.str();
}

RiskNormTable RiskNormTable::pedestrian_defaults() {
  RiskNormTable t;
  t.rows = {{{0, Rational(10)}, 100'000},
            {{10, Rational(20)}, 1'000'000},
            {{20, Rational(30)}, 10'000'000},
            {{30, Rational(40)}, 100'000'000},
            {{40, std::nullopt}, 1'000'000'000}};
  return t;
}

std::string_view to_string(RoadType road) { return road == RoadType::Urban ? "urban" : "highway"; }

RoadType parse_road_type(std::string_view text) {
  if (text == "urban") return RoadType::Urban;
  if (text == "highway") return RoadType::Highway;
  throw QrnError("unknown road type '" + std::string(text) + "' (expected urban or highway)");
}

void ExposureTable::validate() const {
  std::set<std::pair<int, Rational>> seen;
  for (const Row& r : rows) {
    if (r.exposure_hours <= Rational(0))
      throw QrnError("exposure for " + std::string(to_string(r.road)) + " " + r.speed_kmh.to_string() +
                     " km/h must be positive");
    if (!seen.emplace(static_cast<int>(r.road), r.speed_kmh).second)
      throw QrnError("duplicate exposure row " + std::string(to_string(r.road)) + " " + r.speed_kmh.to_string());
  }
}

const ExposureTable::Row& ExposureTable::find(RoadType road, const Rational& speed_kmh) const {
  for (const Row& r : rows)
    if (r.road == road && r.speed_kmh == speed_kmh) return r;
  throw QrnError("no exposure row for " + std::string(to_string(road)) + " roads at " + speed_kmh.to_string() +
                 " km/h");
}

ExposureTable ExposureTable::parse(std::string_view text) {
  ExposureTable t;
  for (const TabSection& s : parse_tabfile(text)) {
    if (s.name != "exposure") throw TextFormatError(s.line, "unexpected section [" + s.name + "]");
    try {
      t.rows.push_back(Row{parse_road_type(s.get("road")), number(s, "speed_kmh"), number(s, "exposure_h")});
    } catch (const QrnError& e) {
      throw TextFormatError(s.line, e.what());
    }
  }
  try {
    t.validate();
  } catch (const QrnError& e) {
    throw TextFormatError(1, e.what());
  }
  return t;
}

std::string ExposureTable::render() const {
  std::ostringstream os;
  for (const Row& r : rows)
    os << (os.tellp() > 0 ? "\n" : "") << "[exposure]\nroad = " << to_string(r.road) << "\nspeed_kmh = " << r.speed_kmh
       << "\nexposure_h = " << r.exposure_hours << "\n";
  return os.str();
}

ExposureTable ExposureTable::pedestrian_defaults() {
  ExposureTable t;
  t.rows = {{RoadType::Urban, 30, 100},          {RoadType::Urban, 50, 1'000},
            {RoadType::Urban, 70, 10'000},       {RoadType::Highway, 30, 100'000},
            {RoadType::Highway, 50, 1'000'000},  {RoadType::Highway, 70, 10'000'000},
            {RoadType::Highway, 100, 10'000'000}};
  return t;
}

std::string MeanTime::to_string() const { return hours ? hours->to_string() : "inf"; }

Rational impact_budget(const Rational& exposure_hours, const Rational& risk_norm_hours) {
  if (exposure_hours <= Rational(0)) throw QrnError("exposure must be positive");
  if (risk_norm_hours <= Rational(0)) throw QrnError("risk norm must be positive");
  return min(Rational(1), exposure_hours / risk_norm_hours);
}

MeanTime mean_time_between(const Rational& exposure_hours, const Rational& probability) {
  if (exposure_hours <= Rational(0)) throw QrnError("exposure must be positive");
  require_probability(probability, "probability");
  if (probability.is_zero()) return MeanTime{};
  return MeanTime{exposure_hours / probability};
}

void Allocation::validate() const {
  require_probability(budget, "budget");
  for (const auto& [name, p] : parts) require_probability(p, "part '" + name + "'");
}

AllocationVerdict check_allocation(const Allocation& allocation) {
  allocation.validate();
  AllocationVerdict v;
  for (const auto& [name, p] : allocation.parts) v.total += p;
  v.pass = v.total <= allocation.budget;
  v.excess = v.pass ? Rational(0) : v.total - allocation.budget;
  return v;
}

void CapabilityTable::validate() const {
  for (const auto& [speed, probs] : by_speed) {
    if (speed < Rational(0)) throw QrnError("negative speed " + speed.to_string());
    if (probs.size() != bands.size()) throw QrnError("capability row has the wrong number of bands");
    Rational sum;
    for (std::size_t b = 0; b < probs.size(); ++b) {
      require_probability(probs[b], "capability at " + speed.to_string() + " km/h, band " + bands[b].label());
      sum += probs[b];
    }
    if (sum > Rational(1))
      throw QrnError("capability at " + speed.to_string() + " km/h sums to " + sum.to_string() + " > 1");
  }
}

const std::vector<Rational>& CapabilityTable::at(const Rational& speed_kmh) const {
  auto it = by_speed.find(speed_kmh);
  if (it == by_speed.end()) throw QrnError("capability table does not cover " + speed_kmh.to_string() + " km/h");
  return it->second;
}

CapabilityTable CapabilityTable::parse(std::string_view text) {
  struct Entry {
    Rational speed;
    SpeedBand band;
    Rational p;
    std::size_t line;
  };
  std::vector<Entry> entries;
  for (const TabSection& s : parse_tabfile(text)) {
    if (s.name != "capability") throw TextFormatError(s.line, "unexpected section [" + s.name + "]");
    try {
      entries.push_back(Entry{number(s, "speed_kmh"), SpeedBand::parse(s.get("band")), number(s, "probability"),
                              s.line});
    } catch (const QrnError& e) {
      throw TextFormatError(s.line, e.what());
    }
  }
  CapabilityTable t;
  for (const Entry& e : entries)
    if (std::find(t.bands.begin(), t.bands.end(), e.band) == t.bands.end()) t.bands.push_back(e.band);
  std::sort(t.bands.begin(), t.bands.end(),
            [](const SpeedBand& a, const SpeedBand& b) { return a.lower < b.lower; });
  std::set<std::pair<Rational, std::size_t>> seen;
  for (const Entry& e : entries) {
    auto& row = t.by_speed[e.speed];
    row.resize(t.bands.size());
    std::size_t b = static_cast<std::size_t>(std::find(t.bands.begin(), t.bands.end(), e.band) - t.bands.begin());
    if (!seen.emplace(e.speed, b).second)
      throw TextFormatError(e.line, "duplicate entry for " + e.speed.to_string() + " km/h, band " + e.band.label());
    row[b] = e.p;
  }
  try {
    t.validate();
  } catch (const QrnError& e) {
    throw TextFormatError(1, e.what());
  }
  return t;
}

std::string CapabilityTable::render() const {
  std::ostringstream os;
  for (const auto& [speed, probs] : by_speed)
    for (std::size_t b = 0; b < bands.size(); ++b)
      os << (os.tellp() > 0 ? "\n" : "") << "[capability]\nspeed_kmh = " << speed << "\nband = "
         << bands[b].label() << "\nprobability = " << probs[b] << "\n";
  return os.str();
}

AdmissibilityResult admissible_speeds(const CapabilityTable& capability, const ExposureTable::Row& exposure,
                                      const RiskNormTable& norms, std::optional<std::vector<Rational>> candidates) {
  norms.validate();
  capability.validate();
  // Capability bands must be norm bands; norm bands missing from the
  // capability table have probability 0.
  std::vector<std::optional<std::size_t>> cap_index(norms.rows.size());
  for (std::size_t cb = 0; cb < capability.bands.size(); ++cb) {
    auto nb = norms.find_band(capability.bands[cb]);
    if (!nb) throw QrnError("capability band " + capability.bands[cb].label() + " has no risk norm");
    cap_index[*nb] = cb;
  }

  std::vector<Rational> speeds;
  if (candidates) {
    speeds = *candidates;
  } else {
    for (const auto& [speed, probs] : capability.by_speed) speeds.push_back(speed);
  }

  AdmissibilityResult result;
  for (const Rational& speed : speeds) {
    const auto& probs = capability.at(speed);
    SpeedVerdict v{speed, true, {}, std::nullopt};
    for (std::size_t nb = 0; nb < norms.rows.size(); ++nb) {
      Rational p = cap_index[nb] ? probs[*cap_index[nb]] : Rational(0);
      MeanTime t = mean_time_between(exposure.exposure_hours, p);
      v.mean_times.push_back(t);
      if (!(t >= norms.rows[nb].norm_hours) && v.admissible) {
        v.admissible = false;
        v.violated_band = nb;
      }
    }
    if (v.admissible && (!result.max_admissible_kmh || *result.max_admissible_kmh < speed))
      result.max_admissible_kmh = speed;
    result.verdicts.push_back(std::move(v));
  }
  return result;
}

}  // namespace safecase::qrn
