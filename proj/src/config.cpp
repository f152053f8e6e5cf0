#include "safecase/config.hpp"

#include <array>
#include <cctype>
#include <set>
#include <sstream>

#include "safecase/tabfile.hpp"

namespace safecase::config {

namespace {

struct Unit {
  std::string_view name;
  Dimension dim;
  Rational factor;
};

const std::array<Unit, 10>& units() {
  static const std::array<Unit, 10> table{{
      {"mm", Dimension::Length, 1},
      {"m", Dimension::Length, 1000},
      {"km", Dimension::Length, 1000000},
      {"mm/s", Dimension::Speed, 1},
      {"m/s", Dimension::Speed, 1000},
      {"km/h", Dimension::Speed, Rational(2500, 9)},
      {"mm/s^2", Dimension::Acceleration, 1},
      {"m/s^2", Dimension::Acceleration, 1000},
      {"s", Dimension::Time, 1},
      {"ms", Dimension::Time, Rational(1, 1000)},
  }};
  return table;
}

std::string_view dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::Length: return "length";
    case Dimension::Speed: return "speed";
    case Dimension::Acceleration: return "acceleration";
    case Dimension::Time: return "time";
  }
  return "?";
}

struct Field {
  std::string_view key;
  Dimension dim;
  Rational scenario::ScenarioParams::*member;
};

const std::array<Field, 9>& fields() {
  using P = scenario::ScenarioParams;
  static const std::array<Field, 9> table{{
      {"a_min", Dimension::Acceleration, &P::a_min},
      {"a_max", Dimension::Acceleration, &P::a_max},
      {"delta", Dimension::Acceleration, &P::delta},
      {"epsilon", Dimension::Length, &P::epsilon},
      {"range", Dimension::Length, &P::range},
      {"vp_max", Dimension::Speed, &P::vp_max},
      {"T", Dimension::Time, &P::T},
      {"margin", Dimension::Length, &P::margin},
      {"v_target", Dimension::Speed, &P::v_target},
  }};
  return table;
}

}  // namespace

Rational parse_quantity(std::string_view text, Dimension dim) {
  std::size_t i = 0;
  while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' || text[i] == '-' ||
                             text[i] == '+' || text[i] == '/' || text[i] == '_' || text[i] == 'e' || text[i] == 'E'))
    ++i;
  std::string_view number = text.substr(0, i);
  std::string_view unit = text.substr(i);
  while (!unit.empty() && unit.front() == ' ') unit.remove_prefix(1);
  while (!unit.empty() && unit.back() == ' ') unit.remove_suffix(1);
  if (number.empty()) throw std::invalid_argument("expected a number in '" + std::string(text) + "'");
  if (unit.empty())
    throw std::invalid_argument("'" + std::string(text) + "' needs a " + std::string(dimension_name(dim)) + " unit");
  for (const Unit& u : units()) {
    if (u.name != unit) continue;
    if (u.dim != dim)
      throw std::invalid_argument("unit '" + std::string(unit) + "' is not a " + std::string(dimension_name(dim)) +
                                  " unit");
    return Rational::parse(number) * u.factor;
  }
  throw std::invalid_argument("unknown unit '" + std::string(unit) + "'");
}

std::string render_quantity(const Rational& base, Dimension dim) {
  switch (dim) {
    case Dimension::Length: return (base / 1000).to_string() + " m";
    case Dimension::Speed: return (base / 1000).to_string() + " m/s";
    case Dimension::Acceleration: return (base / 1000).to_string() + " m/s^2";
    case Dimension::Time: return base.to_string() + " s";
  }
  return base.to_string();
}

scenario::ScenarioParams parse_scenario(std::string_view text) {
  scenario::ScenarioParams p;
  std::vector<TabSection> sections = parse_tabfile(text);
  if (sections.empty()) throw TextFormatError(1, "empty scenario");
  if (sections.size() > 1 || !sections.front().name.empty())
    throw TextFormatError(sections.back().line, "scenario files have no sections");
  const TabSection& s = sections.front();

  std::set<std::string, std::less<>> known{"controller", "pass_option"};
  for (const Field& f : fields()) {
    known.emplace(f.key);
    try {
      p.*f.member = parse_quantity(s.get(f.key), f.dim);
    } catch (const std::invalid_argument& e) {
      throw TextFormatError(s.line_of(f.key), std::string(f.key) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < s.entries.size(); ++i)
    if (!known.count(s.entries[i].first))
      throw TextFormatError(s.entry_lines[i], "unknown key '" + s.entries[i].first + "'");

  if (const std::string* c = s.find("controller")) {
    if (*c == "standard") {
      p.controller = scenario::ControllerKind::Standard;
    } else if (*c == "ignore-epsilon") {
      p.controller = scenario::ControllerKind::IgnoreEpsilon;
    } else {
      throw TextFormatError(s.line_of("controller"), "controller must be standard or ignore-epsilon");
    }
  }
  if (const std::string* po = s.find("pass_option")) {
    if (*po != "true" && *po != "false") throw TextFormatError(s.line_of("pass_option"), "pass_option must be true or false");
    p.pass_option = *po == "true";
  }
  try {
    p.validate();
  } catch (const scenario::ScenarioError& e) {
    throw TextFormatError(s.line, e.what());
  }
  return p;
}

scenario::ScenarioParams load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string render_scenario(const scenario::ScenarioParams& p) {
  std::ostringstream os;
  for (const Field& f : fields()) os << f.key << " = " << render_quantity(p.*f.member, f.dim) << "\n";
  os << "controller = " << scenario::to_string(p.controller) << "\n";
  os << "pass_option = " << (p.pass_option ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace safecase::config
