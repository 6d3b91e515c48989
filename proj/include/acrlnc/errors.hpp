#pragma once

#include <stdexcept>
#include <string>

namespace acrlnc {

// Input rejected at an API boundary (wrong lengths, empty sets, bad ranges).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two received combinations agree on coefficients but not on payload.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedPacket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an operation precondition (e.g. asked the encoder to exceed
// the maximum window).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Topology / scenario configuration that cannot be run as given.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace acrlnc
