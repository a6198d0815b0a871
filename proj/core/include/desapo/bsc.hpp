#pragma once

#include <cstdint>
#include <span>

#include "desapo/constants.hpp"
#include "desapo/stats.hpp"

namespace desapo {

enum class BscVerdict { Pass, IsMeanEscape, RegretBudgetExceeded };

// μ̄ ∈ [olcb − owidth, oucb + owidth].
bool is_mean_within_band(double is_mean, double olcb, double oucb, double is_width);

// Upper limit on Σ_{s∈S}(ℓ_{a_s}(s) − ucb*(S)) tolerated in the stochastic
// regime.
//   base:  bsc2_sqrt_coeff·sqrt(K T log T) + bsc2_sigma_coeff·σ_max·log max(K, 2)
//   ghost: ghost_bsc_coeff·(sqrt(K T log T) + σ_max)
double regret_budget(std::size_t num_arms, Round horizon, std::int64_t sigma_max,
                     const ConstantsProfile& constants, Variant variant);

// Σ_{s∈S}(ℓ_{a_s}(s) − ucb*(S)).
double regret_lower_bound(const ProcessedLog& log);

// Both checks; the band check runs over `active` only.
BscVerdict bsc_check(const ProcessedLog& log, std::span<const ArmIndex> active,
                     std::int64_t sigma_max, const ConstantsProfile& constants, Variant variant);

}  // namespace desapo
