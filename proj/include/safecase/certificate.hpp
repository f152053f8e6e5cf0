#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safecase/grid.hpp"
#include "safecase/scenario.hpp"

namespace safecase::certificate {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kDigestAlgorithm = "sha256";
inline constexpr std::size_t kPayloadWidth = 10;

/// Safe-envelope proof artifact: per distance cell, the largest certified
/// speed in mm/s.
struct Certificate {
  int version = kFormatVersion;
  std::string producer;
  scenario::ScenarioParams params;
  verifier::Grid grid;
  std::string digest;  // lowercase hex
  std::vector<std::int64_t> envelope;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// Byte string the digest is taken over: params in base units as exact
/// fractions, then the grid.
std::string canonical_encoding(const scenario::ScenarioParams& p, const verifier::Grid& g);
std::string params_digest(const scenario::ScenarioParams& p, const verifier::Grid& g);

std::string encode(const Certificate& c);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t line, std::size_t offset, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", byte " + std::to_string(offset) + ": " + message),
        line_(line),
        offset_(offset) {}
  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

/// Inverse of encode. Reports the first malformed line with its byte offset.
Certificate decode(std::string_view bytes);

namespace codes {
inline constexpr std::string_view kMalformed = "MALFORMED";
inline constexpr std::string_view kVersionMismatch = "VERSION_MISMATCH";
inline constexpr std::string_view kPayloadLength = "PAYLOAD_LENGTH";
inline constexpr std::string_view kParamsMismatch = "PARAMS_MISMATCH";
inline constexpr std::string_view kInitialState = "INITIAL_STATE";
inline constexpr std::string_view kClosureFail = "CLOSURE_FAIL";
inline constexpr std::string_view kCollision = "COLLISION";
}  // namespace codes

struct CheckVerdict {
  bool valid = false;
  std::string code;  // empty when valid
  std::optional<std::size_t> cell;
  /// Speed (mm/s) of the failing closure check, when not tied to a cell.
  std::optional<std::int64_t> speed;
  std::string message;
};

/// Re-checks a certificate against p with scenario primitives only:
/// header and digest, initial states, the controller guard and speed domain
/// of every cell, worst-case braking from every cell corner, then closure
/// of the braking-viable set over all integer speeds up to v_max.
CheckVerdict check_certificate(const Certificate& c, const scenario::ScenarioParams& p);

/// decode, then check_certificate; decode failures are MALFORMED.
CheckVerdict check_certificate_bytes(std::string_view bytes, const scenario::ScenarioParams& p);

}  // namespace safecase::certificate
