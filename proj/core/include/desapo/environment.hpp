#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <variant>
#include <vector>

#include "desapo/types.hpp"

namespace desapo {

// Counter-based uniform in [0, 1): a pure function of its key, so schedules
// can be regenerated at any (t, arm) without consuming a stream.
double keyed_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
std::uint64_t mix64(std::uint64_t x);

struct BernoulliLosses {
  std::vector<double> means;
};

// rows[t - 1][arm].
struct TableLosses {
  std::vector<std::vector<double>> rows;
};

// Bernoulli(means_a) before flip_round, Bernoulli(means_b) from flip_round on.
struct FlipLosses {
  std::vector<double> means_a;
  std::vector<double> means_b;
  Round flip_round = 1;
};

// Oblivious loss schedule. Every ℓ_t(i) is fixed by (model, seed) before
// play starts and never depends on the learner's actions.
class LossModel {
 public:
  using Spec = std::variant<BernoulliLosses, TableLosses, FlipLosses>;

  LossModel() = default;
  explicit LossModel(Spec spec) : spec_(std::move(spec)) {}

  double loss_at(Round t, ArmIndex arm, std::uint64_t seed) const;
  // E[ℓ_t(arm)]; equals the table entry for table-driven schedules.
  double mean_at(Round t, ArmIndex arm) const;
  std::size_t num_arms() const;
  // i.i.d. across rounds (Bernoulli only).
  bool stochastic() const { return std::holds_alternative<BernoulliLosses>(spec_); }
  std::string kind() const;
  const Spec& spec() const { return spec_; }

  // Throws ConfigError if the model cannot serve K arms for T rounds.
  void validate(std::size_t num_arms, Round horizon) const;

 private:
  Spec spec_;
};

struct FixedDelay {
  Round d = 0;
};
// delays[t - 1].
struct TableDelay {
  std::vector<Round> delays;
};
// Geometric on {0, 1, ...} with the given mean, truncated at cap.
struct GeometricCappedDelay {
  double mean = 0.0;
  Round cap = 0;
};
// base everywhere except `spike` at the listed rounds.
struct SpikeDelay {
  Round base = 0;
  Round spike = 0;
  std::vector<Round> rounds;
};

class DelayModel {
 public:
  using Spec = std::variant<FixedDelay, TableDelay, GeometricCappedDelay, SpikeDelay>;

  DelayModel() = default;
  explicit DelayModel(Spec spec) : spec_(std::move(spec)) {}

  Round delay_at(Round t, std::uint64_t seed) const;
  std::string kind() const;
  const Spec& spec() const { return spec_; }
  void validate(Round horizon) const;

  // d_1..d_T.
  std::vector<Round> realize(Round horizon, std::uint64_t seed) const;

 private:
  Spec spec_;
};

// "t,arm0,...,arm{K-1}" with t = 1, 2, ... in order.
TableLosses read_loss_table_csv(std::istream& in);
TableLosses load_loss_table_csv(const std::filesystem::path& path);
// "t,delay" with t = 1, 2, ... in order.
std::vector<Round> read_delay_csv(std::istream& in);
std::vector<Round> load_delay_csv(const std::filesystem::path& path);

}  // namespace desapo
