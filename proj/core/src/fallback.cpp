#include "desapo/fallback.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace desapo {

double default_exp3_learning_rate(std::size_t num_arms, Round horizon) {
  const double k = static_cast<double>(num_arms);
  return std::sqrt(std::log2(k) / (k * static_cast<double>(horizon)));
}

DelayedExp3::DelayedExp3(std::size_t num_arms, Round horizon, std::optional<double> eta)
    : estimates_(num_arms, 0.0),
      eta_(eta.value_or(default_exp3_learning_rate(num_arms, horizon))) {
  if (num_arms == 0) throw ConfigError("number of arms must be positive");
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw ConfigError("exp3 learning rate must be finite and non-negative");
}

void DelayedExp3::activate(Round first_round) { activated_at_ = first_round; }

std::vector<double> exp3_distribution(const std::vector<double>& estimates, double eta) {
  const double lowest = *std::min_element(estimates.begin(), estimates.end());
  std::vector<double> p(estimates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    p[i] = std::exp(-eta * (estimates[i] - lowest));
    total += p[i];
  }
  for (double& v : p) v /= total;
  // exp underflow can zero an arm that has fallen far behind.
  constexpr double kFloor = 1e-300;
  for (double& v : p) v = std::max(v, kFloor);
  return p;
}

std::vector<double> DelayedExp3::choose(Round t) {
  if (!activated_at_ || t < *activated_at_) {
    throw ProtocolError("exp3 asked to choose before activation");
  }
  return exp3_distribution(estimates_, eta_);
}

void DelayedExp3::feed(const RoundRecord& rec) {
  if (!activated_at_ || rec.round < *activated_at_) {
    throw ProtocolError("exp3 fed round " + std::to_string(rec.round) +
                        " it did not choose");
  }
  if (rec.arm >= estimates_.size()) throw ProtocolError("arm index out of range");
  if (!(rec.probability > 0.0)) throw ProtocolError("non-positive pull probability");
  estimates_[rec.arm] += rec.loss / rec.probability;
}

std::unique_ptr<FallbackAlgorithm> make_fallback(std::string_view name, std::size_t num_arms,
                                                 Round horizon) {
  if (name == "exp3-delayed") return std::make_unique<DelayedExp3>(num_arms, horizon);
  throw ConfigError("fallback: unknown algorithm \"" + std::string(name) + "\"");
}

}  // namespace desapo
