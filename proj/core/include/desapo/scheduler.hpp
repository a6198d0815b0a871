#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "desapo/types.hpp"

namespace desapo {

// Delayed-feedback event queue. Round t's feedback becomes available at the
// start of round t + d_t + 1, i.e. once s + d_s < t.
//
// Call order per round t: arrivals_at(t), then at most one submit() for t.
class DelayLedger {
 public:
  // Starts round t (must be exactly one past the previous call) and returns
  // every record with arrival == t - 1, ascending by pull round.
  std::vector<RoundRecord> arrivals_at(Round t);

  // Queues the pull of the current round.
  void submit(const RoundRecord& rec);

  Round current_round() const { return current_; }
  // σ(current round): pulls with round ≤ t and arrival > t.
  std::int64_t sigma_now() const { return sigma_now_; }
  std::int64_t sigma_max() const { return sigma_max_; }
  // D: sum of all submitted delays.
  std::int64_t total_delay() const { return total_delay_; }
  std::int64_t delivered_count() const { return delivered_; }
  std::int64_t submitted_count() const { return submitted_; }
  std::size_t pending_count() const { return pending_size_; }

 private:
  std::map<Round, std::vector<RoundRecord>> pending_;
  std::size_t pending_size_ = 0;
  Round current_ = 0;
  Round last_submitted_ = 0;
  std::int64_t sigma_now_ = 0;
  std::int64_t sigma_max_ = 0;
  std::int64_t total_delay_ = 0;
  std::int64_t delivered_ = 0;
  std::int64_t submitted_ = 0;
};

struct SigmaCertificate {
  std::int64_t sigma_max = 0;
  std::int64_t total_delay = 0;
  // sigma[t - 1] = σ(t) for t = 1..T.
  std::vector<std::int64_t> sigma;
};

// Quadratic scan straight from the definition of σ(t). Reference oracle for
// the incremental ledger.
SigmaCertificate sigma_d_certificate(std::span<const Round> delays);

// Same quantities through a difference array over outstanding intervals,
// O(T). Used on long runs where the quadratic scan is too slow.
SigmaCertificate sigma_d_sweep(std::span<const Round> delays);

// D ≥ σ_max(σ_max + 1) / 2, which holds for every delay sequence.
bool delay_backlog_inequality_holds(std::int64_t sigma_max, std::int64_t total_delay);

}  // namespace desapo
