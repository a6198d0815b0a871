#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "desapo/types.hpp"

namespace desapo {

// log_base(T). Base 2 unless a profile says otherwise.
double log_horizon(Round horizon, double base = 2.0);

// Per-arm confidence radius: min{1, sqrt(2 log T / n)}, 1 when n == 0.
double width(std::int64_t pulls, Round horizon, double log_base = 2.0);

// Importance-sampling radius: min{1, sqrt(2 K log T / |S|)}, 1 when |S| == 0.
double owidth(std::size_t processed, std::size_t num_arms, Round horizon,
              double log_base = 2.0);

struct ArmMeanStats {
  std::int64_t pulls_observed = 0;
  double loss_sum = 0.0;
  double running_ucb = std::numeric_limits<double>::infinity();
  double running_lcb = -std::numeric_limits<double>::infinity();
};

struct ArmISStats {
  double is_sum = 0.0;
  double running_oucb = std::numeric_limits<double>::infinity();
  double running_olcb = -std::numeric_limits<double>::infinity();
};

struct StatsOptions {
  double log_base = 2.0;
  // Project the importance-sampling mean onto [0, 1] before forming its
  // bounds. The raw mean can reach K / |S| while the radius is capped at 1.
  bool clip_is_mean = true;
};

// The processed sequence S together with every statistic the algorithm
// reads from it. All bounds are prefix running min/max values maintained in
// O(K) per append.
class ProcessedLog {
 public:
  ProcessedLog(std::size_t num_arms, Round horizon, StatsOptions options = {});

  // Appends one delivered round. Throws ProtocolError on a duplicate or
  // out-of-range record.
  void append(const RoundRecord& rec);

  bool contains(Round round) const;
  std::size_t size() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }
  std::size_t num_arms() const { return mean_.size(); }
  Round horizon() const { return horizon_; }
  double log_t() const { return log_t_; }
  const StatsOptions& options() const { return options_; }
  const std::vector<RoundRecord>& rounds() const { return rounds_; }

  const ArmMeanStats& mean_stats(ArmIndex arm) const { return mean_.at(arm); }
  const ArmISStats& is_stats(ArmIndex arm) const { return is_.at(arm); }

  std::int64_t pulls(ArmIndex arm) const { return mean_.at(arm).pulls_observed; }
  // 0 for an arm without observations.
  double empirical_mean(ArmIndex arm) const;
  double arm_width(ArmIndex arm) const;
  // Importance-sampling mean L̄_i(S)/|S| (clipped per options).
  double is_mean(ArmIndex arm) const;
  double is_width() const;
  double ucb(ArmIndex arm) const { return mean_.at(arm).running_ucb; }
  double lcb(ArmIndex arm) const { return mean_.at(arm).running_lcb; }
  double oucb(ArmIndex arm) const { return is_.at(arm).running_oucb; }
  double olcb(ArmIndex arm) const { return is_.at(arm).running_olcb; }

  // min{1, min_i min{ucb_i, oucb_i}}; 1 on the empty log.
  double ucb_star() const { return ucb_star_; }
  // Σ_{s∈S} ℓ_{a_s}(s).
  double loss_total() const { return loss_total_; }

 private:
  std::vector<ArmMeanStats> mean_;
  std::vector<ArmISStats> is_;
  std::vector<RoundRecord> rounds_;
  std::vector<bool> seen_;
  Round horizon_;
  StatsOptions options_;
  double log_t_;
  double loss_total_ = 0.0;
  double ucb_star_ = 1.0;
};

}  // namespace desapo
