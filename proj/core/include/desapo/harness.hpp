#pragma once

#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "desapo/environment.hpp"
#include "desapo/sapo.hpp"

namespace desapo {

enum class PolicyKind { Desapo, Uniform, Exp3 };

std::string to_string(PolicyKind p);
PolicyKind parse_policy(const std::string& name);

struct RunConfig {
  std::size_t num_arms = 2;
  Round horizon = 1000;
  LossModel loss;
  DelayModel delay;
  PolicyKind policy = PolicyKind::Desapo;
  SapoOptions sapo;

  // Throws ConfigError before any round is played.
  void validate() const;
};

struct TraceRow {
  Round t = 0;
  ArmIndex arm = 0;
  std::uint64_t prob_hash = 0;
  std::int64_t sigma = 0;
  bool switched = false;
  double cum_pseudo_regret = 0.0;
  double cum_adv_regret = 0.0;
};

struct ArmOutcome {
  ArmStatus status = ArmStatus::Active;
  std::optional<Round> flagged_at;  // round the elimination rule fired
  std::optional<Round> tau;         // formal elimination round
  std::optional<EliminationSnapshot> snapshot;
  int phases = 0;  // r_i(T)
  int errors = 0;  // E_i
  std::int64_t ghost_pulls = 0;
  std::int64_t pulls = 0;
};

struct RunDiagnostics {
  double max_prob_sum_error = 0.0;
  double min_probability = 1.0;
  double max_phase_product_error = 0.0;  // relative
  std::int64_t phase_product_checks = 0;
  int guard_events = 0;
};

struct RunTrace {
  std::uint64_t seed = 0;
  Round horizon = 0;
  std::size_t num_arms = 0;
  std::vector<TraceRow> rows;
  double pseudo_regret = 0.0;
  double adversarial_regret = 0.0;
  std::optional<Round> switch_round;
  SwitchReason switch_reason = SwitchReason::None;
  std::optional<Round> suppressed_switch_round;
  std::vector<ArmOutcome> arms;
  std::int64_t sigma_max = 0;
  std::int64_t total_delay = 0;
  RunDiagnostics diagnostics;
};

struct RunOptions {
  bool record_rows = true;
};

// Plays one full interaction. A pure function of (config, seed): losses and
// delays come from the seed's environment stream, the learner's sampling
// from a separate stream.
RunTrace run_once(const RunConfig& config, std::uint64_t seed, RunOptions options = {});

// Per-trace checks of the stochastic-regime lemmas. Entries that need known
// means are empty for non-stochastic loss models.
struct LemmaReport {
  std::optional<bool> optimal_kept;       // best arm never flagged
  std::optional<bool> gap_bracket;        // Δ̃_i ≤ Δ_i ≤ 2Δ̃_i
  std::optional<bool> elimination_order;  // earlier arm i1 ⇒ Δ_i2 ≤ 20 Δ_i1
  bool phase_count = true;                // r_i ≤ 7 log T + 1
  bool delay_backlog = true;              // D ≥ σ_max(σ_max+1)/2
  bool scheduler_agreement = true;        // ledger σ_max, D == sweep oracle
  std::optional<bool> ghost_pull_bound;   // n_i(S_i^g) ≤ 1600 n_i(S̃_i)

  std::vector<std::string> violations() const;
};

LemmaReport lemma_oracles(const RunTrace& trace, const RunConfig& config);

// Names used in BatchSummary::lemma_violations.
const std::vector<std::string>& lemma_names();

struct BatchSummary {
  std::vector<std::uint64_t> seeds;  // ascending
  double mean_pseudo_regret = 0.0;
  double std_pseudo_regret = 0.0;
  double mean_adv_regret = 0.0;
  double std_adv_regret = 0.0;
  double switch_rate = 0.0;
  std::map<std::string, int> lemma_violations;
};

struct BatchResult {
  std::vector<RunTrace> traces;  // ascending by seed
  std::vector<LemmaReport> reports;
  BatchSummary summary;
};

struct BatchOptions {
  unsigned jobs = 0;  // 0: hardware concurrency
  RunOptions run;
};

class BatchError : public std::runtime_error {
 public:
  BatchError(std::uint64_t seed, const std::string& what, std::exception_ptr cause)
      : std::runtime_error("seed " + std::to_string(seed) + ": " + what),
        seed_(seed),
        cause_(std::move(cause)) {}
  std::uint64_t seed() const { return seed_; }
  // The original exception of the failing run.
  std::exception_ptr cause() const { return cause_; }

 private:
  std::uint64_t seed_;
  std::exception_ptr cause_;
};

BatchResult run_batch(const RunConfig& config, std::vector<std::uint64_t> seeds,
                      BatchOptions options = {});

// Order-independent aggregate of per-seed finals.
BatchSummary summarize(std::vector<RunTrace> const& traces, std::vector<LemmaReport> const& reports);

// FNV-1a over the bit patterns of the vector.
std::uint64_t hash_probabilities(const std::vector<double>& probs);

}  // namespace desapo
