#pragma once

#include <cstdint>
#include <map>

#include "desapo/constants.hpp"
#include "desapo/types.hpp"

namespace desapo {

// Frozen at the moment an arm leaves the equal-probability set.
struct EliminationSnapshot {
  Round tau = 0;                  // formal elimination round (0 while ghosted)
  std::size_t s_tilde_len = 0;    // |S̃_i|
  std::int64_t n_at_elim = 0;     // n_i(S̃_i)
  double mu_tilde = 0.0;          // μ̂_i(S̃_i)
  double delta_tilde = 0.0;       // delta_mult * width_i(S̃_i)
  double p1 = 0.0;                // 1/(2K) + n_i/(2T)
  double n1 = 0.0;                // n1_numerator / (p1 Δ̃²)
};

EliminationSnapshot make_snapshot(Round tau, std::size_t s_len, std::int64_t pulls, double mu_hat,
                                  double arm_width, std::size_t num_arms, Round horizon,
                                  const ConstantsProfile& constants);

struct PhaseState {
  int r = 1;
  double n_cap = 0.0;
  int p_exponent = 0;          // probability = p1 * 2^-p_exponent
  std::int64_t phase_len = 0;  // |S_i^r|
  double phase_is_sum = 0.0;   // L̄(S_i^r)
  int error_count = 0;
};

enum class PhaseEvent { None, Error, Success };

// ⌈max_errors_mult · log T⌉.
int error_budget(Round horizon, const ConstantsProfile& constants);

// Post-elimination monitor of one arm: dyadic probability banks plus the
// phase machine that decides the arm's sampling probability.
class EliminatedArmMonitor {
 public:
  EliminatedArmMonitor(EliminationSnapshot snapshot, int error_budget);

  struct Step {
    double probability;
    bool switch_requested;
  };

  // Files an observed post-elimination round under the exponent the arm had
  // when that round was played. contribution = 1{a_s = i} ℓ / p_i(s).
  void bank(Round round, int exponent, double contribution);

  // Drains the bank of the current exponent, applying phase transitions
  // until that bank is empty. switch_requested is set the moment the error
  // count reaches the budget.
  Step step();

  // Feeds one round into the current phase and applies the transition it
  // triggers, if any.
  PhaseEvent consume(double contribution);

  double probability() const;
  int current_exponent() const { return phase_.p_exponent; }
  const PhaseState& phase() const { return phase_; }
  const EliminationSnapshot& snapshot() const { return snapshot_; }
  EliminationSnapshot& snapshot() { return snapshot_; }
  std::size_t banked(int exponent) const;
  int budget() const { return budget_; }

 private:
  EliminationSnapshot snapshot_;
  PhaseState phase_;
  int budget_;
  // exponent -> (pull round -> contribution), drained in pull-round order
  std::map<int, std::map<Round, double>> banks_;
};

}  // namespace desapo
