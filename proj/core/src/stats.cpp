#include "desapo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace desapo {

double log_horizon(Round horizon, double base) {
  if (horizon < 2) {
    throw ConfigError("horizon T must be at least 2, got " + std::to_string(horizon));
  }
  if (!(base > 1.0)) {
    throw ConfigError("log base must exceed 1");
  }
  return std::log(static_cast<double>(horizon)) / std::log(base);
}

namespace {

double capped_radius(double numerator, double count) {
  if (count <= 0.0) return 1.0;
  return std::min(1.0, std::sqrt(numerator / count));
}

}  // namespace

double width(std::int64_t pulls, Round horizon, double log_base) {
  return capped_radius(2.0 * log_horizon(horizon, log_base), static_cast<double>(pulls));
}

double owidth(std::size_t processed, std::size_t num_arms, Round horizon, double log_base) {
  if (num_arms == 0) throw ConfigError("number of arms must be positive");
  return capped_radius(2.0 * static_cast<double>(num_arms) * log_horizon(horizon, log_base),
                       static_cast<double>(processed));
}

ProcessedLog::ProcessedLog(std::size_t num_arms, Round horizon, StatsOptions options)
    : mean_(num_arms),
      is_(num_arms),
      seen_(static_cast<std::size_t>(std::max<Round>(horizon, 0)) + 1, false),
      horizon_(horizon),
      options_(options),
      log_t_(log_horizon(horizon, options.log_base)) {
  if (num_arms == 0) throw ConfigError("number of arms must be positive");
}

bool ProcessedLog::contains(Round round) const {
  return round >= 1 && round <= horizon_ && seen_[static_cast<std::size_t>(round)];
}

double ProcessedLog::empirical_mean(ArmIndex arm) const {
  const auto& m = mean_.at(arm);
  return m.pulls_observed == 0 ? 0.0 : m.loss_sum / static_cast<double>(m.pulls_observed);
}

double ProcessedLog::arm_width(ArmIndex arm) const {
  return capped_radius(2.0 * log_t_, static_cast<double>(mean_.at(arm).pulls_observed));
}

double ProcessedLog::is_mean(ArmIndex arm) const {
  if (rounds_.empty()) return 0.0;
  const double raw = is_.at(arm).is_sum / static_cast<double>(rounds_.size());
  return options_.clip_is_mean ? std::clamp(raw, 0.0, 1.0) : raw;
}

double ProcessedLog::is_width() const {
  return capped_radius(2.0 * static_cast<double>(mean_.size()) * log_t_,
                       static_cast<double>(rounds_.size()));
}

void ProcessedLog::append(const RoundRecord& rec) {
  if (rec.round < 1 || rec.round > horizon_) {
    throw ProtocolError("round " + std::to_string(rec.round) + " outside [1, T]");
  }
  if (seen_[static_cast<std::size_t>(rec.round)]) {
    throw ProtocolError("round " + std::to_string(rec.round) + " already processed");
  }
  if (rec.arm >= mean_.size()) throw ProtocolError("arm index out of range");
  if (!(rec.loss >= 0.0 && rec.loss <= 1.0)) throw ProtocolError("loss outside [0, 1]");
  if (!(rec.probability > 0.0 && rec.probability <= 1.0)) {
    throw ProtocolError("pull probability outside (0, 1]");
  }

  seen_[static_cast<std::size_t>(rec.round)] = true;
  rounds_.push_back(rec);
  loss_total_ += rec.loss;

  auto& pulled = mean_[rec.arm];
  pulled.pulls_observed += 1;
  pulled.loss_sum += rec.loss;
  is_[rec.arm].is_sum += rec.loss / rec.probability;

  const double ow = is_width();
  double best = std::numeric_limits<double>::infinity();
  for (ArmIndex i = 0; i < mean_.size(); ++i) {
    auto& m = mean_[i];
    if (m.pulls_observed == 0) {
      m.running_ucb = std::min(m.running_ucb, 1.0);
      m.running_lcb = std::max(m.running_lcb, 0.0);
    } else {
      const double mu = empirical_mean(i);
      const double w = arm_width(i);
      m.running_ucb = std::min(m.running_ucb, mu + w);
      m.running_lcb = std::max(m.running_lcb, mu - w);
    }
    auto& s = is_[i];
    const double mu_bar = is_mean(i);
    s.running_oucb = std::min(s.running_oucb, mu_bar + ow);
    s.running_olcb = std::max(s.running_olcb, mu_bar - ow);
    best = std::min({best, m.running_ucb, s.running_oucb});
  }
  // The empty-log value 1 stays an upper bound: losses lie in [0, 1].
  ucb_star_ = std::min(ucb_star_, best);
}

}  // namespace desapo
