#include "desapo/eap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "desapo/stats.hpp"

namespace desapo {

EliminationSnapshot make_snapshot(Round tau, std::size_t s_len, std::int64_t pulls, double mu_hat,
                                  double arm_width, std::size_t num_arms, Round horizon,
                                  const ConstantsProfile& constants) {
  EliminationSnapshot snap;
  snap.tau = tau;
  snap.s_tilde_len = s_len;
  snap.n_at_elim = pulls;
  snap.mu_tilde = mu_hat;
  snap.delta_tilde = constants.delta_mult * arm_width;
  snap.p1 = 1.0 / (2.0 * static_cast<double>(num_arms)) +
            static_cast<double>(pulls) / (2.0 * static_cast<double>(horizon));
  snap.n1 = constants.n1_numerator / (snap.p1 * snap.delta_tilde * snap.delta_tilde);
  return snap;
}

int error_budget(Round horizon, const ConstantsProfile& constants) {
  return static_cast<int>(
      std::ceil(constants.max_errors_mult * log_horizon(horizon, constants.log_base)));
}

EliminatedArmMonitor::EliminatedArmMonitor(EliminationSnapshot snapshot, int error_budget)
    : snapshot_(snapshot), budget_(error_budget) {
  phase_.n_cap = snapshot_.n1;
}

double EliminatedArmMonitor::probability() const {
  return std::ldexp(snapshot_.p1, -phase_.p_exponent);
}

void EliminatedArmMonitor::bank(Round round, int exponent, double contribution) {
  if (exponent < 0) throw InvariantError("negative probability exponent for eliminated arm");
  auto [it, inserted] = banks_[exponent].emplace(round, contribution);
  if (!inserted) {
    throw ProtocolError("round " + std::to_string(round) + " banked twice");
  }
}

std::size_t EliminatedArmMonitor::banked(int exponent) const {
  auto it = banks_.find(exponent);
  return it == banks_.end() ? 0 : it->second.size();
}

PhaseEvent EliminatedArmMonitor::consume(double contribution) {
  phase_.phase_len += 1;
  phase_.phase_is_sum += contribution;

  const double shortfall =
      static_cast<double>(phase_.phase_len) * snapshot_.mu_tilde - phase_.phase_is_sum;
  if (shortfall >= 0.25 * snapshot_.delta_tilde * phase_.n_cap) {
    phase_.error_count += 1;
    phase_.n_cap = std::max(snapshot_.n1, 0.5 * phase_.n_cap);
    phase_.p_exponent = std::max(0, phase_.p_exponent - 1);
    phase_.phase_len = 0;
    phase_.phase_is_sum = 0.0;
    phase_.r += 1;
    return PhaseEvent::Error;
  }
  if (phase_.phase_len == static_cast<std::int64_t>(std::floor(phase_.n_cap))) {
    phase_.n_cap *= 2.0;
    phase_.p_exponent += 1;
    phase_.phase_len = 0;
    phase_.phase_is_sum = 0.0;
    phase_.r += 1;
    return PhaseEvent::Success;
  }
  return PhaseEvent::None;
}

EliminatedArmMonitor::Step EliminatedArmMonitor::step() {
  for (;;) {
    auto bank_it = banks_.find(phase_.p_exponent);
    if (bank_it == banks_.end() || bank_it->second.empty()) break;
    auto& bank = bank_it->second;
    const double contribution = bank.begin()->second;
    bank.erase(bank.begin());
    if (consume(contribution) == PhaseEvent::Error && phase_.error_count >= budget_) {
      return {probability(), true};
    }
  }
  return {probability(), false};
}

}  // namespace desapo
