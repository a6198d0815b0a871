#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "desapo/bsc.hpp"
#include "desapo/constants.hpp"
#include "desapo/eap.hpp"
#include "desapo/fallback.hpp"
#include "desapo/stats.hpp"

namespace desapo {

enum class ArmStatus { Active, Ghost, Eliminated };

enum class SwitchReason { None, IsMeanEscape, RegretBudget, PhaseErrors };

std::string to_string(ArmStatus s);
std::string to_string(SwitchReason r);

struct SapoOptions {
  Variant variant = Variant::Base;
  ConstantsProfile constants;
  std::string fallback = "exp3-delayed";
  // When false, a failed check is recorded but ignored and the active set is
  // frozen from then on (never-switching reference run).
  bool allow_switch = true;
  // When false, a round pulled from an eliminated arm at or after its
  // elimination only feeds the probability banks. When true, every arriving
  // round is also appended to the processed sequence.
  bool append_eliminated_pulls = false;
};

struct SapoEvent {
  enum class Kind { Flagged, Eliminated, ActiveSetGuard, Switched, SwitchSuppressed };
  Kind kind;
  Round round = 0;
  ArmIndex arm = 0;
  SwitchReason reason = SwitchReason::None;
};

struct ArmLifecycle {
  ArmStatus status = ArmStatus::Active;
  std::optional<Round> flagged_at;
  // Ghost variant: snapshot frozen at flag time, moved into the monitor at
  // the elimination point.
  std::optional<EliminationSnapshot> ghost_snapshot;
  std::optional<EliminatedArmMonitor> monitor;
  // n_i(S \ S̃_i) at formal elimination (ghost variant), 0 otherwise.
  std::int64_t ghost_pulls = 0;

  const EliminationSnapshot* snapshot() const {
    if (monitor) return &monitor->snapshot();
    if (ghost_snapshot) return &*ghost_snapshot;
    return nullptr;
  }
};

// Best-of-both-worlds learner for delayed bandits: successive elimination
// with soft elimination (dyadic phases for eliminated arms), stochasticity
// checks on every processed round, and an irrevocable switch to a fallback
// adversarial algorithm when a check fails.
class DelayedSapo {
 public:
  using Observer = std::function<void(const SapoEvent&)>;

  DelayedSapo(std::size_t num_arms, Round horizon, SapoOptions options = {});

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  // One round: ingest arrivals (B(t) \ S in pull order), run the eliminated
  // arms' phase machines, then assign p(t). sigma_max is σ_max so far.
  const std::vector<double>& begin_round(Round t, std::span<const RoundRecord> arrivals,
                                         std::int64_t sigma_max);

  // Samples a_t ~ p(t).
  ArmIndex act(std::mt19937_64& rng) const;

  // Stages of begin_round, exposed for targeted tests.
  SwitchReason process_feedback(const RoundRecord& rec);
  std::vector<ArmIndex> elimination_rule();
  BscVerdict bsc_check() const;
  EliminatedArmMonitor::Step eap_step(ArmIndex arm);
  const std::vector<double>& choose_probabilities(Round t);

  bool switched() const { return switched_; }
  std::optional<Round> switch_round() const { return switch_round_; }
  SwitchReason switch_reason() const { return switch_reason_; }
  std::optional<Round> suppressed_switch_round() const { return suppressed_round_; }
  SwitchReason suppressed_switch_reason() const { return suppressed_reason_; }

  std::size_t num_arms() const { return arms_.size(); }
  Round horizon() const { return horizon_; }
  Round current_round() const { return current_; }
  const SapoOptions& options() const { return options_; }
  const ProcessedLog& log() const { return log_; }
  const std::vector<double>& probabilities() const { return probs_; }
  const ArmLifecycle& arm(ArmIndex i) const { return arms_.at(i); }
  // Arms that share the equal-probability mass (ghosts included).
  std::vector<ArmIndex> active_arms() const;
  int elimination_level() const { return level_; }
  const FallbackAlgorithm* fallback() const { return fallback_.get(); }

 private:
  void trigger_switch(SwitchReason reason);
  void run_elimination_points();
  void emit(const SapoEvent& e) const {
    if (observer_) observer_(e);
  }

  SapoOptions options_;
  Round horizon_;
  ProcessedLog log_;
  std::vector<ArmLifecycle> arms_;
  std::vector<double> probs_;
  // Exponent of each eliminated arm (-1 while active) for played rounds
  // whose feedback has not been processed yet.
  std::unordered_map<Round, std::vector<int>> played_;
  int budget_;
  int level_ = 1;  // h: next elimination point is min width <= 2^-h
  Round current_ = 0;
  std::int64_t sigma_max_ = 0;
  bool frozen_ = false;
  bool switched_ = false;
  std::optional<Round> switch_round_;
  SwitchReason switch_reason_ = SwitchReason::None;
  std::optional<Round> suppressed_round_;
  SwitchReason suppressed_reason_ = SwitchReason::None;
  std::unique_ptr<FallbackAlgorithm> fallback_;
  Observer observer_;
};

// Eliminated arms (engaged entries) keep their probability; the remaining
// mass is split equally over the others. Throws InvariantError if nothing is
// left to split.
std::vector<double> split_probabilities(std::span<const std::optional<double>> eliminated);

// Inverse-CDF draw from a probability vector using 53 random bits.
ArmIndex sample_categorical(std::span<const double> probabilities, std::mt19937_64& rng);

}  // namespace desapo
