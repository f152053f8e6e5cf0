#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safecase/rational.hpp"

namespace safecase::qrn {

class QrnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open impact-speed band [lower, upper) in km/h; no upper bound means
/// the band is open to the top.
struct SpeedBand {
  Rational lower;
  std::optional<Rational> upper;

  bool contains(const Rational& kmh) const { return lower <= kmh && (!upper || kmh < *upper); }
  /// "[10, 20)" or "[40, inf)".
  std::string label() const;
  static SpeedBand parse(std::string_view text);

  friend bool operator==(const SpeedBand&, const SpeedBand&) = default;
};

/// Minimum allowed mean time between accidents per impact-speed band.
struct RiskNormTable {
  struct Row {
    SpeedBand band;
    Rational norm_hours;
  };
  std::vector<Row> rows;

  /// Throws QrnError unless bands are contiguous, ascending, and norms positive.
  void validate() const;
  /// Throws QrnError unless the bands start at 0 and the last one is open.
  void require_full_cover() const;
  std::optional<std::size_t> band_of(const Rational& kmh) const;
  std::optional<std::size_t> find_band(const SpeedBand& band) const;

  static RiskNormTable parse(std::string_view text);
  std::string render() const;
  /// The pedestrian risk norms (100 000 h below 10 km/h up to 1e9 h at 40 km/h and above).
  static RiskNormTable pedestrian_defaults();
};

enum class RoadType { Urban, Highway };
std::string_view to_string(RoadType road);
RoadType parse_road_type(std::string_view text);

/// Mean time between incidents per road type and road speed.
struct ExposureTable {
  struct Row {
    RoadType road;
    Rational speed_kmh;
    Rational exposure_hours;
  };
  std::vector<Row> rows;

  void validate() const;
  const Row& find(RoadType road, const Rational& speed_kmh) const;

  static ExposureTable parse(std::string_view text);
  std::string render() const;
  static ExposureTable pedestrian_defaults();
};

/// Mean time in hours; infinite when the event never happens.
struct MeanTime {
  std::optional<Rational> hours;  // nullopt means infinity

  bool infinite() const { return !hours.has_value(); }
  std::string to_string() const;
  friend bool operator>=(const MeanTime& t, const Rational& bound) { return t.infinite() || *t.hours >= bound; }
};

/// Largest allowed probability of an impact in a band per incident:
/// min(1, exposure / norm). Throws QrnError on non-positive input.
Rational impact_budget(const Rational& exposure_hours, const Rational& risk_norm_hours);

/// exposure / p, infinite for p = 0. Throws QrnError unless exposure > 0 and p in [0, 1].
MeanTime mean_time_between(const Rational& exposure_hours, const Rational& probability);

struct Allocation {
  Rational budget;
  std::map<std::string, Rational> parts;

  /// Throws QrnError unless every probability lies in [0, 1].
  void validate() const;
};

struct AllocationVerdict {
  bool pass = false;
  Rational total;
  /// total - budget when failing, 0 otherwise.
  Rational excess;
};

/// Pass iff the parts sum to at most the budget (exact).
AllocationVerdict check_allocation(const Allocation& allocation);

/// Probability of an impact in each band, per initial speed (km/h), for one
/// incident. Band probabilities are aligned with a RiskNormTable.
struct CapabilityTable {
  std::vector<SpeedBand> bands;
  std::map<Rational, std::vector<Rational>> by_speed;

  void validate() const;
  const std::vector<Rational>& at(const Rational& speed_kmh) const;

  static CapabilityTable parse(std::string_view text);
  std::string render() const;
};

struct SpeedVerdict {
  Rational speed_kmh;
  bool admissible = false;
  /// Per band: mean time between impacts in that band.
  std::vector<MeanTime> mean_times;
  /// First band whose norm is violated, if any.
  std::optional<std::size_t> violated_band;
};

struct AdmissibilityResult {
  std::vector<SpeedVerdict> verdicts;
  std::optional<Rational> max_admissible_kmh;
};

/// A speed is admissible iff for every band the mean time between impacts in
/// that band is at least the band's norm (inclusive). Candidates default to
/// every speed in the capability table; an uncovered candidate throws.
AdmissibilityResult admissible_speeds(const CapabilityTable& capability, const ExposureTable::Row& exposure,
                                      const RiskNormTable& norms,
                                      std::optional<std::vector<Rational>> candidates = std::nullopt);

}  // namespace safecase::qrn
