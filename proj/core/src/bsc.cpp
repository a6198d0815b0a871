#include "desapo/bsc.hpp"

#include <algorithm>
#include <cmath>

namespace desapo {

bool is_mean_within_band(double is_mean, double olcb, double oucb, double is_width) {
  return is_mean >= olcb - is_width && is_mean <= oucb + is_width;
}

double regret_budget(std::size_t num_arms, Round horizon, std::int64_t sigma_max,
                     const ConstantsProfile& constants, Variant variant) {
  const double k = static_cast<double>(num_arms);
  const double root = std::sqrt(k * static_cast<double>(horizon) *
                                log_horizon(horizon, constants.log_base));
  const double sigma = static_cast<double>(sigma_max);
  if (variant == Variant::Ghost) return constants.ghost_bsc_coeff * (root + sigma);
  const double log_k = std::log(std::max(k, 2.0)) / std::log(constants.log_base);
  return constants.bsc2_sqrt_coeff * root + constants.bsc2_sigma_coeff * sigma * log_k;
}

double regret_lower_bound(const ProcessedLog& log) {
  return log.loss_total() - static_cast<double>(log.size()) * log.ucb_star();
}

BscVerdict bsc_check(const ProcessedLog& log, std::span<const ArmIndex> active,
                     std::int64_t sigma_max, const ConstantsProfile& constants, Variant variant) {
  const double ow = log.is_width();
  for (ArmIndex i : active) {
    if (!is_mean_within_band(log.is_mean(i), log.olcb(i), log.oucb(i), ow)) {
      return BscVerdict::IsMeanEscape;
    }
  }
  if (regret_lower_bound(log) >
      regret_budget(log.num_arms(), log.horizon(), sigma_max, constants, variant)) {
    return BscVerdict::RegretBudgetExceeded;
  }
  return BscVerdict::Pass;
}

}  // namespace desapo
