#include "desapo/constants.hpp"

#include "desapo/types.hpp"

namespace desapo {

std::string to_string(Variant v) { return v == Variant::Base ? "base" : "ghost"; }

Variant parse_variant(const std::string& name) {
  if (name == "base") return Variant::Base;
  if (name == "ghost") return Variant::Ghost;
  throw ConfigError("variant: expected \"base\" or \"ghost\", got \"" + name + "\"");
}

void ConstantsProfile::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"elim_width_mult", elim_width_mult}, {"delta_mult", delta_mult},
      {"n1_numerator", n1_numerator},       {"bsc2_sqrt_coeff", bsc2_sqrt_coeff},
      {"bsc2_sigma_coeff", bsc2_sigma_coeff}, {"max_errors_mult", max_errors_mult},
      {"ghost_bsc_coeff", ghost_bsc_coeff},
  };
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0)) throw ConfigError(std::string("constants.") + name + " must be positive");
  }
  if (!(log_base > 1.0)) throw ConfigError("constants.log_base must exceed 1");
}

ConstantsProfile ConstantsProfile::aggressive() {
  ConstantsProfile c;
  c.bsc2_sqrt_coeff = 3.0;
  return c;
}

}  // namespace desapo
