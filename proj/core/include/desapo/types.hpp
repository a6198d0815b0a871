#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace desapo {

using Round = std::int64_t;
using ArmIndex = std::size_t;

// One pulled round. Arrival is derived so that arrival == round + delay
// holds by construction.
struct RoundRecord {
  Round round = 0;
  ArmIndex arm = 0;
  double loss = 0.0;
  double probability = 1.0;
  Round delay = 0;

  Round arrival() const { return round + delay; }
};

// Invalid user-facing configuration (bad K, T, model parameters, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Caller broke the interaction protocol (out-of-order submission, feedback
// for a round the receiver never produced, ...).
class ProtocolError : public std::logic_error {
 public:
  explicit ProtocolError(const std::string& what) : std::logic_error(what) {}
};

// Internal state machine invariant failed.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace desapo
