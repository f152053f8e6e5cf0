#pragma once

#include <string>
#include <string_view>

#include "safecase/rational.hpp"
#include "safecase/scenario.hpp"

namespace safecase::config {

enum class Dimension { Length, Speed, Acceleration, Time };

/// Parses "<number> <unit>" (the space is optional) into base units:
/// mm, mm/s, mm/s^2 or s. Accepted units: m, mm, km; m/s, mm/s, km/h;
/// m/s^2, mm/s^2; s, ms. A missing or foreign unit throws
/// std::invalid_argument.
Rational parse_quantity(std::string_view text, Dimension dim);

/// Renders a base-unit value in SI units: "0.5 m", "175/9 m/s".
std::string render_quantity(const Rational& base, Dimension dim);

/// Reads `key = value unit` lines (scenario.cfg). Every numeric value needs
/// a unit. Optional keys: controller (standard | ignore-epsilon) and
/// pass_option (true | false). Unknown keys throw TextFormatError; the
/// result is validated.
scenario::ScenarioParams parse_scenario(std::string_view text);
scenario::ScenarioParams load_scenario(const std::string& path);

/// Canonical scenario.cfg text; parse_scenario(render_scenario(p)) == p.
std::string render_scenario(const scenario::ScenarioParams& p);

}  // namespace safecase::config
