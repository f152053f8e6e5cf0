#include "safecase/certificate.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

#include "safecase/config.hpp"
#include "safecase/tabfile.hpp"

namespace safecase::certificate {

namespace {

using scenario::Disturbance;
using scenario::ScenarioParams;
using scenario::VehicleState;

constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

std::string fraction(const Rational& r) { return std::to_string(r.num()) + "/" + std::to_string(r.den()); }

CheckVerdict invalid(std::string_view code, std::string message, std::optional<std::size_t> cell = std::nullopt,
                     std::optional<std::int64_t> speed = std::nullopt) {
  return CheckVerdict{false, std::string(code), cell, speed, std::move(message)};
}

struct Line {
  std::string_view text;
  std::size_t number;
  std::size_t offset;
};

class LineReader {
 public:
  explicit LineReader(std::string_view bytes) : bytes_(bytes) {}

  bool at_end() const { return pos_ >= bytes_.size(); }

  Line next(std::string_view what) {
    if (at_end()) throw DecodeError(number_ + 1, pos_, "unexpected end of input, expected " + std::string(what));
    std::size_t eol = bytes_.find('\n', pos_);
    if (eol == std::string_view::npos) throw DecodeError(number_ + 1, pos_, "line is not terminated by LF");
    Line line{bytes_.substr(pos_, eol - pos_), ++number_, pos_};
    if (line.text.find('\r') != std::string_view::npos) throw DecodeError(line.number, pos_, "CR in certificate");
    pos_ = eol + 1;
    return line;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::string_view after_prefix(const Line& line, std::string_view prefix) {
  if (line.text.substr(0, prefix.size()) != prefix)
    throw DecodeError(line.number, line.offset, "expected '" + std::string(prefix) + "'");
  return line.text.substr(prefix.size());
}

std::int64_t parse_count(const Line& line, std::string_view digits, std::size_t max_len) {
  if (digits.empty() || digits.size() > max_len ||
      !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw DecodeError(line.number, line.offset, "expected a decimal integer");
  std::int64_t v = 0;
  for (char c : digits) v = v * 10 + (c - '0');
  return v;
}

// Worst-case braking step: areq = a_min, act_err = +delta.
VehicleState brake_step(const VehicleState& s, const ScenarioParams& p) {
  return scenario::plant_step(s, p.a_min, Disturbance{0, p.delta, false}, p);
}

}  // namespace

std::string canonical_encoding(const ScenarioParams& p, const verifier::Grid& g) {
  std::ostringstream os;
  os << "safecase-params 1\n"
     << "a_min=" << fraction(p.a_min) << "\n"
     << "a_max=" << fraction(p.a_max) << "\n"
     << "delta=" << fraction(p.delta) << "\n"
     << "epsilon=" << fraction(p.epsilon) << "\n"
     << "range=" << fraction(p.range) << "\n"
     << "vp_max=" << fraction(p.vp_max) << "\n"
     << "T=" << fraction(p.T) << "\n"
     << "margin=" << fraction(p.margin) << "\n"
     << "v_target=" << fraction(p.v_target) << "\n"
     << "controller=" << scenario::to_string(p.controller) << "\n"
     << "pass_option=" << (p.pass_option ? 1 : 0) << "\n"
     << "d_max=" << g.d_max << "\n"
     << "d_step=" << g.d_step << "\n"
     << "v_max=" << g.v_max << "\n"
     << "v_step=" << g.v_step << "\n";
  return os.str();
}

std::string params_digest(const ScenarioParams& p, const verifier::Grid& g) {
  std::string data = canonical_encoding(p, g);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xf]);
  }
  return hex;
}

std::string encode(const Certificate& c) {
  std::ostringstream os;
  os << "safecase-certificate " << c.version << "\n";
  os << "producer " << c.producer << "\n";
  os << "digest-algorithm " << kDigestAlgorithm << "\n";
  std::istringstream params(config::render_scenario(c.params));
  for (std::string line; std::getline(params, line);) os << "param " << line << "\n";
  std::istringstream grid(verifier::render_grid(c.grid));
  for (std::string line; std::getline(grid, line);) os << "grid " << line << "\n";
  os << "digest " << c.digest << "\n";
  os << "payload " << c.envelope.size() << "\n";
  for (std::int64_t v : c.envelope) {
    std::string digits = std::to_string(v);
    if (v < 0 || digits.size() > kPayloadWidth) throw std::invalid_argument("payload value out of range");
    os << std::string(kPayloadWidth - digits.size(), '0') << digits << "\n";
  }
  return os.str();
}

Certificate decode(std::string_view bytes) {
  LineReader in(bytes);
  Certificate c;

  Line line = in.next("certificate header");
  c.version = static_cast<int>(parse_count(line, after_prefix(line, "safecase-certificate "), 6));

  line = in.next("producer");
  c.producer = std::string(after_prefix(line, "producer "));

  line = in.next("digest algorithm");
  if (after_prefix(line, "digest-algorithm ") != kDigestAlgorithm)
    throw DecodeError(line.number, line.offset, "unsupported digest algorithm");

  std::string param_text;
  std::vector<Line> param_lines;
  line = in.next("param line");
  while (line.text.substr(0, 6) == "param ") {
    param_text.append(line.text.substr(6)).push_back('\n');
    param_lines.push_back(line);
    line = in.next("grid line");
  }
  if (param_lines.empty()) throw DecodeError(line.number, line.offset, "expected 'param '");
  try {
    c.params = config::parse_scenario(param_text);
  } catch (const TextFormatError& e) {
    const Line& at = param_lines[std::min(e.line(), param_lines.size()) - 1];
    throw DecodeError(at.number, at.offset, e.what());
  }

  std::string grid_text;
  Line first_grid = line;
  while (line.text.substr(0, 5) == "grid ") {
    grid_text.append(line.text.substr(5)).push_back('\n');
    line = in.next("digest line");
  }
  try {
    c.grid = verifier::parse_grid(grid_text);
  } catch (const std::exception& e) {
    throw DecodeError(first_grid.number, first_grid.offset, e.what());
  }

  c.digest = std::string(after_prefix(line, "digest "));
  if (c.digest.size() != 64 || !std::all_of(c.digest.begin(), c.digest.end(), [](char ch) {
        return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
      }))
    throw DecodeError(line.number, line.offset, "digest must be 64 lowercase hex digits");

  line = in.next("payload header");
  std::int64_t count = parse_count(line, after_prefix(line, "payload "), 9);
  c.envelope.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    line = in.next("payload value");
    if (line.text.size() != kPayloadWidth)
      throw DecodeError(line.number, line.offset, "payload values are " + std::to_string(kPayloadWidth) + " digits");
    c.envelope.push_back(parse_count(line, line.text, kPayloadWidth));
  }
  if (!in.at_end()) {
    Line extra = in.next("end of input");
    throw DecodeError(extra.number, extra.offset, "trailing data after payload");
  }
  return c;
}

CheckVerdict check_certificate(const Certificate& c, const ScenarioParams& p) {
  // (a) header, digest and parameters
  if (c.version != kFormatVersion)
    return invalid(codes::kVersionMismatch, "certificate version " + std::to_string(c.version) + ", expected " +
                                                std::to_string(kFormatVersion));
  const verifier::Grid& g = c.grid;
  try {
    g.validate();
  } catch (const std::exception& e) {
    return invalid(codes::kMalformed, e.what());
  }
  if (c.envelope.size() != g.cells())
    return invalid(codes::kPayloadLength, "payload has " + std::to_string(c.envelope.size()) + " cells, grid has " +
                                              std::to_string(g.cells()));
  if (params_digest(c.params, g) != c.digest)
    return invalid(codes::kParamsMismatch, "digest does not match the certificate's parameters and grid");
  if (!(c.params == p)) return invalid(codes::kParamsMismatch, "certificate was issued for different parameters");
  try {
    p.validate();
  } catch (const std::exception& e) {
    return invalid(codes::kParamsMismatch, e.what());
  }
  if (p.pass_option) return invalid(codes::kParamsMismatch, "parameters enable the pass option");

  // (b) initial states: detection at range with any speed up to v_target
  const std::int64_t start_gap = p.range.floor();
  const std::int64_t start_speed = p.v_target.floor();
  if (start_gap > g.d_max) return invalid(codes::kInitialState, "detection range lies beyond d_max");
  const std::size_t start_cell = static_cast<std::size_t>(start_gap / g.d_step);
  if (c.envelope[start_cell] < start_speed)
    return invalid(codes::kInitialState,
                   "v_target exceeds the certified speed " + std::to_string(c.envelope[start_cell]) + " mm/s at range",
                   start_cell);

  // (c) every cell corner is in the speed domain and passes the controller guard
  for (std::size_t i = 0; i < c.envelope.size(); ++i) {
    std::int64_t v = c.envelope[i];
    if (v < 0 || v > g.v_max || v % g.v_step != 0)
      return invalid(codes::kClosureFail, "speed " + std::to_string(v) + " mm/s is not a grid speed", i);
    if (v == 0) continue;
    VehicleState corner{0, v, g.distance(i), true};
    if (!scenario::safe_predicate(scenario::sense(corner, 0), v, 0, p))
      return invalid(codes::kClosureFail, "controller would brake at the corner of cell " + std::to_string(i), i);
  }

  // (d) worst-case braking from every corner stops short of the pedestrian
  for (std::size_t i = 0; i < c.envelope.size(); ++i) {
    VehicleState s{0, c.envelope[i], g.distance(i), true};
    while (s.v > 0) {
      VehicleState n = brake_step(s, p);
      if (scenario::collides(s, n))
        return invalid(codes::kCollision, "worst-case braking from cell " + std::to_string(i) + " reaches the pedestrian",
                       i);
      if (n.v >= s.v) return invalid(codes::kCollision, "braking does not slow the vehicle", i);
      s = n;
    }
  }

  // (e) closure of {gap >= need[v]}, need[v] = worst braking travel + 1
  std::vector<std::int64_t> need(static_cast<std::size_t>(g.v_max) + 1, 0);
  std::vector<std::int64_t> travel(need.size(), 0);
  const std::int64_t far = std::numeric_limits<std::int64_t>::max() / 4;
  for (std::int64_t v = 1; v <= g.v_max; ++v) {
    VehicleState n = brake_step(VehicleState{0, v, far, false}, p);
    auto idx = static_cast<std::size_t>(v);
    if (n.v >= v || travel[static_cast<std::size_t>(n.v)] == kUnreachable) {
      travel[idx] = kUnreachable;
      need[idx] = kUnreachable;
    } else {
      travel[idx] = n.x + travel[static_cast<std::size_t>(n.v)];
      need[idx] = travel[idx] + 1;
    }
    if (need[idx] < need[idx - 1])
      return invalid(codes::kClosureFail, "braking need is not monotone in speed", std::nullopt, v);
  }
  if (start_speed > g.v_max || need[static_cast<std::size_t>(start_speed)] > start_gap)
    return invalid(codes::kInitialState, "initial states cannot stop before the pedestrian");

  const std::int64_t err = std::max<std::int64_t>(0, p.epsilon.floor());
  const std::array<Rational, 2> act{-p.delta, p.delta};
  auto successor_ok = [&](const VehicleState& s, const Rational& areq, std::int64_t v) -> std::optional<CheckVerdict> {
    for (const Rational& e : act) {
      VehicleState n = scenario::plant_step(s, areq, Disturbance{err, e, false}, p);
      if (scenario::collides(s, n))
        return invalid(codes::kCollision, "step from speed " + std::to_string(v) + " mm/s reaches the pedestrian",
                       std::nullopt, v);
      std::int64_t gap = n.xp - n.x;
      if (n.v > g.v_max || need[static_cast<std::size_t>(n.v)] > gap)
        return invalid(codes::kClosureFail, "step from speed " + std::to_string(v) + " mm/s leaves the invariant",
                       std::nullopt, v);
    }
    return std::nullopt;
  };

  for (std::int64_t v = 0; v <= g.v_max; ++v) {
    std::int64_t lo = need[static_cast<std::size_t>(v)];
    if (lo == kUnreachable) continue;
    if (auto bad = successor_ok(VehicleState{0, v, lo, true}, p.a_min, v)) return *bad;

    // Smallest gap at which the most favourable reading lets the controller cruise.
    Rational slack = p.margin - Rational(err);
    if (p.controller == scenario::ControllerKind::Standard) slack += p.epsilon;
    std::int64_t gap = std::max(lo, (Rational(scenario::stopping_distance(v, p)) + slack).ceil());
    VehicleState s{0, v, gap, true};
    scenario::SensorReading r = scenario::sense(s, err);
    if (!scenario::safe_predicate(r, v, 0, p))
      return invalid(codes::kClosureFail, "controller guard disagrees with its closed form", std::nullopt, v);
    if (gap > lo && scenario::safe_predicate(scenario::sense(VehicleState{0, v, gap - 1, true}, err), v, 0, p))
      return invalid(codes::kClosureFail, "controller guard disagrees with its closed form", std::nullopt, v);
    if (auto bad = successor_ok(s, scenario::controller(r, v, 0, p), v)) return *bad;
  }
  return CheckVerdict{true, "", std::nullopt, std::nullopt, "certificate is valid"};
}

CheckVerdict check_certificate_bytes(std::string_view bytes, const ScenarioParams& p) {
  Certificate c;
  try {
    c = decode(bytes);
  } catch (const DecodeError& e) {
    return invalid(codes::kMalformed, e.what());
  }
  return check_certificate(c, p);
}

}  // namespace safecase::certificate
