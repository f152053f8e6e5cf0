#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safecase/qrn.hpp"
#include "safecase/rational.hpp"
#include "safecase/scenario.hpp"

namespace safecase::capability {

class CapabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Timing {
  /// The pedestrian is in the path from the moment of detection.
  Adversarial,
  /// The pedestrian enters after offset / vp_max seconds.
  Offsets,
};

struct Weighted {
  Rational value;  // mm
  Rational weight;
};

struct IncidentModel {
  std::vector<Weighted> distances;
  Timing timing = Timing::Adversarial;
  /// Lateral offsets (mm) of the pedestrian from the path; Offsets timing only.
  std::vector<Weighted> offsets;

  /// Throws CapabilityError unless weights are >= 0 and each list sums to 1.
  void validate() const;
};

/// Reads an incidents table:
///
///     timing = adversarial | offsets
///     distance <value> <unit> <weight>
///     uniform <count> <from> <to> <unit>      # count evenly spaced points
///     offset <value> <unit> <weight>
///
/// `#` starts a comment.
IncidentModel parse_incidents(std::string_view text);

/// `count` evenly spaced distances over [from, to] (mm), equal weights.
std::vector<Weighted> uniform_grid(std::size_t count, const Rational& from, const Rational& to);

/// Whether an incident at detection distance d (mm) ends in an impact when
/// the pedestrian enters after `entry` seconds, and at what speed (mm/s).
std::int64_t incident_impact(const scenario::ScenarioParams& p, const Rational& v0, const Rational& d,
                             const Rational& entry);

struct Distribution {
  /// Aligned with the rows of the band table.
  std::vector<Rational> band_mass;
  Rational no_impact;
};

/// Exact distribution of impact-speed bands for initial speed v0_kmh.
Distribution impact_distribution(const scenario::ScenarioParams& p, const Rational& v0_kmh, const IncidentModel& m,
                                 const qrn::RiskNormTable& bands);

qrn::CapabilityTable capability_table(const scenario::ScenarioParams& p, const std::vector<Rational>& speeds_kmh,
                                      const IncidentModel& m, const qrn::RiskNormTable& bands);

/// mm/s to km/h and back, exact.
Rational to_kmh(const Rational& mm_per_s);
Rational from_kmh(const Rational& kmh);

}  // namespace safecase::capability
