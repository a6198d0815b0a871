#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "desapo/types.hpp"

namespace desapo {

// Adversarial-regime algorithm the stochastic phase hands control to.
//
// Contract: after activate(t0), choose(t) returns a strictly positive
// distribution over the K arms for every t >= t0, and feed() is called once
// per arriving record of a round this algorithm chose, carrying the
// probability that round was played with.
class FallbackAlgorithm {
 public:
  virtual ~FallbackAlgorithm() = default;

  virtual void activate(Round first_round) = 0;
  virtual bool active() const = 0;
  virtual std::vector<double> choose(Round t) = 0;
  virtual void feed(const RoundRecord& rec) = 0;
  virtual std::string_view name() const = 0;
};

// sqrt(log2 K / (K T)).
double default_exp3_learning_rate(std::size_t num_arms, Round horizon);

// EXP3 with importance-weighted loss estimates applied at arrival time.
class DelayedExp3 final : public FallbackAlgorithm {
 public:
  DelayedExp3(std::size_t num_arms, Round horizon, std::optional<double> eta = std::nullopt);

  void activate(Round first_round) override;
  bool active() const override { return activated_at_.has_value(); }
  std::vector<double> choose(Round t) override;
  void feed(const RoundRecord& rec) override;
  std::string_view name() const override { return "exp3-delayed"; }

  double eta() const { return eta_; }
  const std::vector<double>& cumulative_estimates() const { return estimates_; }
  std::optional<Round> activated_at() const { return activated_at_; }

 private:
  std::vector<double> estimates_;
  double eta_;
  std::optional<Round> activated_at_;
};

// Softmax of -eta * estimates, shifted by the minimum for stability.
std::vector<double> exp3_distribution(const std::vector<double>& estimates, double eta);

// Known names: "exp3-delayed". Throws ConfigError otherwise.
std::unique_ptr<FallbackAlgorithm> make_fallback(std::string_view name, std::size_t num_arms,
                                                 Round horizon);

}  // namespace desapo
