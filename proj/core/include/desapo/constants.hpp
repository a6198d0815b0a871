#pragma once

#include <string>

namespace desapo {

enum class Variant { Base, Ghost };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

// Tunable constants of the stochastic-phase algorithm. Defaults follow the
// analysed algorithm; bsc2_sigma_coeff uses the value the regret lemma
// proves (30) rather than the 10 printed in the check itself.
struct ConstantsProfile {
  double elim_width_mult = 9.0;
  double delta_mult = 8.0;
  double n1_numerator = 1280.0;
  double bsc2_sqrt_coeff = 272.0;
  double bsc2_sigma_coeff = 30.0;
  double max_errors_mult = 3.0;
  // C in the ghost variant's regret check, C(sqrt(K T log T) + σ_max).
  double ghost_bsc_coeff = 302.0;
  double log_base = 2.0;
  bool clip_is_mean = true;

  // Throws ConfigError naming the first non-positive field.
  void validate() const;

  // Small regret budget so adversarial drift is caught at desk scale.
  static ConstantsProfile aggressive();

  bool operator==(const ConstantsProfile&) const = default;
};

}  // namespace desapo
