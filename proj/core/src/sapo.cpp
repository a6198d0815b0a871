#include "desapo/sapo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace desapo {

std::string to_string(ArmStatus s) {
  switch (s) {
    case ArmStatus::Active: return "active";
    case ArmStatus::Ghost: return "ghost";
    case ArmStatus::Eliminated: return "eliminated";
  }
  return "unknown";
}

std::string to_string(SwitchReason r) {
  switch (r) {
    case SwitchReason::None: return "none";
    case SwitchReason::IsMeanEscape: return "is_mean_escape";
    case SwitchReason::RegretBudget: return "regret_budget";
    case SwitchReason::PhaseErrors: return "phase_errors";
  }
  return "unknown";
}

ArmIndex sample_categorical(std::span<const double> probabilities, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cumulative = 0.0;
  ArmIndex last_positive = 0;
  for (ArmIndex i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    cumulative += probabilities[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

DelayedSapo::DelayedSapo(std::size_t num_arms, Round horizon, SapoOptions options)
    : options_(std::move(options)),
      horizon_(horizon),
      log_(num_arms, horizon,
           StatsOptions{options_.constants.log_base, options_.constants.clip_is_mean}),
      arms_(num_arms),
      probs_(num_arms, num_arms == 0 ? 0.0 : 1.0 / static_cast<double>(num_arms)),
      budget_(error_budget(horizon, options_.constants)) {
  options_.constants.validate();
  if (horizon < static_cast<Round>(num_arms)) throw ConfigError("T must be at least K");
  // Fail on an unknown fallback name now rather than at switch time.
  make_fallback(options_.fallback, num_arms, horizon);
}

std::vector<ArmIndex> DelayedSapo::active_arms() const {
  std::vector<ArmIndex> out;
  for (ArmIndex i = 0; i < arms_.size(); ++i) {
    if (arms_[i].status != ArmStatus::Eliminated) out.push_back(i);
  }
  return out;
}

const std::vector<double>& DelayedSapo::begin_round(Round t,
                                                    std::span<const RoundRecord> arrivals,
                                                    std::int64_t sigma_max) {
  if (t <= current_ || t > horizon_) {
    throw ProtocolError("begin_round out of order: round " + std::to_string(t));
  }
  current_ = t;
  sigma_max_ = sigma_max;

  if (!switched_) {
    for (const auto& rec : arrivals) {
      const SwitchReason reason = process_feedback(rec);
      if (reason != SwitchReason::None) {
        trigger_switch(reason);
        if (switched_) break;
      }
    }
  }
  if (!switched_) {
    for (ArmIndex i = 0; i < arms_.size(); ++i) {
      if (arms_[i].status != ArmStatus::Eliminated) continue;
      if (eap_step(i).switch_requested) {
        trigger_switch(SwitchReason::PhaseErrors);
        if (switched_) break;
      }
    }
  }

  if (switched_) {
    // Pre-switch feedback is dropped; the fallback only learns from its own plays.
    for (const auto& rec : arrivals) {
      if (rec.round >= *switch_round_) fallback_->feed(rec);
    }
    probs_ = fallback_->choose(t);
    return probs_;
  }
  return choose_probabilities(t);
}

ArmIndex DelayedSapo::act(std::mt19937_64& rng) const { return sample_categorical(probs_, rng); }

SwitchReason DelayedSapo::process_feedback(const RoundRecord& rec) {
  auto played = played_.find(rec.round);
  if (played == played_.end()) {
    throw ProtocolError("feedback for round " + std::to_string(rec.round) +
                        " that this learner did not play or already processed");
  }
  if (rec.arm >= arms_.size()) throw ProtocolError("arm index out of range");

  const auto& pulled = arms_[rec.arm];
  const bool banked_only = !options_.append_eliminated_pulls &&
                           pulled.status == ArmStatus::Eliminated &&
                           rec.round >= pulled.monitor->snapshot().tau;

  for (ArmIndex i = 0; i < arms_.size(); ++i) {
    auto& a = arms_[i];
    if (a.status != ArmStatus::Eliminated || rec.round < a.monitor->snapshot().tau) continue;
    const int exponent = played->second[i];
    if (exponent < 0) {
      throw InvariantError("post-elimination round without a recorded probability exponent");
    }
    double contribution = 0.0;
    if (rec.arm == i) {
      if (rec.probability != std::ldexp(a.monitor->snapshot().p1, -exponent)) {
        throw InvariantError("pull probability of eliminated arm matches no dyadic exponent");
      }
      contribution = rec.loss / rec.probability;
    }
    a.monitor->bank(rec.round, exponent, contribution);
  }
  played_.erase(played);
  if (banked_only) return SwitchReason::None;

  log_.append(rec);
  switch (bsc_check()) {
    case BscVerdict::IsMeanEscape: return SwitchReason::IsMeanEscape;
    case BscVerdict::RegretBudgetExceeded: return SwitchReason::RegretBudget;
    case BscVerdict::Pass: break;
  }
  elimination_rule();
  if (options_.variant == Variant::Ghost && !frozen_) run_elimination_points();
  return SwitchReason::None;
}

BscVerdict DelayedSapo::bsc_check() const {
  const auto active = active_arms();
  return desapo::bsc_check(log_, active, sigma_max_, options_.constants, options_.variant);
}

std::vector<ArmIndex> DelayedSapo::elimination_rule() {
  std::vector<ArmIndex> flagged;
  if (frozen_) return flagged;

  const double ucb_star = log_.ucb_star();
  const double mult = options_.constants.elim_width_mult;
  std::size_t candidates = 0;
  for (ArmIndex i = 0; i < arms_.size(); ++i) {
    if (arms_[i].status != ArmStatus::Active) continue;
    ++candidates;
    if (log_.pulls(i) > 0 && log_.empirical_mean(i) - mult * log_.arm_width(i) > ucb_star) {
      flagged.push_back(i);
    }
  }
  if (flagged.empty()) return flagged;

  if (flagged.size() == candidates) {
    // Never empty the equal-probability set: keep the least convincing arm.
    auto keep = std::min_element(flagged.begin(), flagged.end(), [&](ArmIndex a, ArmIndex b) {
      return log_.empirical_mean(a) - mult * log_.arm_width(a) <
             log_.empirical_mean(b) - mult * log_.arm_width(b);
    });
    emit({SapoEvent::Kind::ActiveSetGuard, current_, *keep});
    flagged.erase(keep);
  }

  for (ArmIndex i : flagged) {
    auto& a = arms_[i];
    auto snap = make_snapshot(current_, log_.size(), log_.pulls(i), log_.empirical_mean(i),
                              log_.arm_width(i), arms_.size(), horizon_, options_.constants);
    a.flagged_at = current_;
    if (options_.variant == Variant::Base) {
      a.status = ArmStatus::Eliminated;
      a.monitor.emplace(snap, budget_);
      emit({SapoEvent::Kind::Eliminated, current_, i});
    } else {
      snap.tau = 0;
      a.status = ArmStatus::Ghost;
      a.ghost_snapshot = snap;
      emit({SapoEvent::Kind::Flagged, current_, i});
    }
  }
  return flagged;
}

void DelayedSapo::run_elimination_points() {
  double min_width = std::numeric_limits<double>::infinity();
  for (ArmIndex i = 0; i < arms_.size(); ++i) min_width = std::min(min_width, log_.arm_width(i));

  while (min_width <= std::ldexp(1.0, -level_)) {
    for (ArmIndex i = 0; i < arms_.size(); ++i) {
      auto& a = arms_[i];
      if (a.status != ArmStatus::Ghost) continue;
      auto snap = *a.ghost_snapshot;
      snap.tau = current_;
      a.ghost_pulls = log_.pulls(i) - snap.n_at_elim;
      a.ghost_snapshot.reset();
      a.monitor.emplace(snap, budget_);
      a.status = ArmStatus::Eliminated;
      emit({SapoEvent::Kind::Eliminated, current_, i});
    }
    ++level_;
  }
}

EliminatedArmMonitor::Step DelayedSapo::eap_step(ArmIndex arm) {
  auto& a = arms_.at(arm);
  if (a.status != ArmStatus::Eliminated) {
    throw ProtocolError("eap_step on arm " + std::to_string(arm) + " that is not eliminated");
  }
  return a.monitor->step();
}

std::vector<double> split_probabilities(std::span<const std::optional<double>> eliminated) {
  std::vector<double> probs(eliminated.size(), 0.0);
  double eliminated_mass = 0.0;
  std::size_t sharing = 0;
  for (std::size_t i = 0; i < eliminated.size(); ++i) {
    if (eliminated[i]) {
      probs[i] = *eliminated[i];
      eliminated_mass += probs[i];
    } else {
      ++sharing;
    }
  }
  if (sharing == 0 || !(eliminated_mass < 1.0)) {
    throw InvariantError("eliminated arms hold the entire probability mass");
  }
  const double share = (1.0 - eliminated_mass) / static_cast<double>(sharing);
  for (std::size_t i = 0; i < eliminated.size(); ++i) {
    if (!eliminated[i]) probs[i] = share;
  }
  return probs;
}

const std::vector<double>& DelayedSapo::choose_probabilities(Round t) {
  std::vector<int> exponents(arms_.size(), -1);
  std::vector<std::optional<double>> eliminated(arms_.size());
  for (ArmIndex i = 0; i < arms_.size(); ++i) {
    const auto& a = arms_[i];
    if (a.status == ArmStatus::Eliminated) {
      eliminated[i] = a.monitor->probability();
      exponents[i] = a.monitor->current_exponent();
    }
  }
  probs_ = split_probabilities(eliminated);
  played_[t] = std::move(exponents);
  return probs_;
}

void DelayedSapo::trigger_switch(SwitchReason reason) {
  if (!options_.allow_switch) {
    if (!suppressed_round_) {
      suppressed_round_ = current_;
      suppressed_reason_ = reason;
      emit({SapoEvent::Kind::SwitchSuppressed, current_, 0, reason});
    }
    frozen_ = true;
    return;
  }
  switched_ = true;
  switch_round_ = current_;
  switch_reason_ = reason;
  played_.clear();
  fallback_ = make_fallback(options_.fallback, arms_.size(), horizon_);
  fallback_->activate(current_);
  emit({SapoEvent::Kind::Switched, current_, 0, reason});
}

}  // namespace desapo
