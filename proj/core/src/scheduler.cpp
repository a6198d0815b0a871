#include "desapo/scheduler.hpp"

#include <algorithm>
#include <string>

namespace desapo {

std::vector<RoundRecord> DelayLedger::arrivals_at(Round t) {
  if (t != current_ + 1) {
    throw ProtocolError("arrivals_at must advance one round at a time (expected " +
                        std::to_string(current_ + 1) + ", got " + std::to_string(t) + ")");
  }
  current_ = t;

  std::vector<RoundRecord> out;
  if (auto it = pending_.find(t - 1); it != pending_.end()) {
    out = std::move(it->second);
    pending_.erase(it);
    pending_size_ -= out.size();
    delivered_ += static_cast<std::int64_t>(out.size());
  }
  // Pulls arriving exactly at t stop being outstanding at t.
  if (auto it = pending_.find(t); it != pending_.end()) {
    sigma_now_ -= static_cast<std::int64_t>(it->second.size());
  }
  return out;
}

void DelayLedger::submit(const RoundRecord& rec) {
  if (rec.round != current_ || current_ == 0) {
    throw ProtocolError("submit for round " + std::to_string(rec.round) +
                        " while current round is " + std::to_string(current_));
  }
  if (rec.round == last_submitted_) {
    throw ProtocolError("round " + std::to_string(rec.round) + " submitted twice");
  }
  if (rec.delay < 0) throw ProtocolError("negative delay");

  last_submitted_ = rec.round;
  ++submitted_;
  total_delay_ += rec.delay;
  if (rec.arrival() > current_) ++sigma_now_;
  sigma_max_ = std::max(sigma_max_, sigma_now_);
  pending_[rec.arrival()].push_back(rec);
  ++pending_size_;
}

SigmaCertificate sigma_d_certificate(std::span<const Round> delays) {
  const auto horizon = static_cast<Round>(delays.size());
  SigmaCertificate cert;
  cert.sigma.assign(delays.size(), 0);
  for (Round tau = 1; tau <= horizon; ++tau) cert.total_delay += delays[tau - 1];
  for (Round t = 1; t <= horizon; ++t) {
    std::int64_t missing = 0;
    for (Round tau = 1; tau <= t; ++tau) {
      if (tau + delays[tau - 1] > t) ++missing;
    }
    cert.sigma[t - 1] = missing;
    cert.sigma_max = std::max(cert.sigma_max, missing);
  }
  return cert;
}

SigmaCertificate sigma_d_sweep(std::span<const Round> delays) {
  const auto horizon = static_cast<Round>(delays.size());
  SigmaCertificate cert;
  cert.sigma.assign(delays.size(), 0);
  // Round tau is outstanding for t in [tau, tau + d - 1].
  std::vector<std::int64_t> diff(delays.size() + 2, 0);
  for (Round tau = 1; tau <= horizon; ++tau) {
    const Round d = delays[tau - 1];
    cert.total_delay += d;
    if (d <= 0) continue;
    const Round last = std::min(horizon, tau + d - 1);
    diff[tau] += 1;
    diff[last + 1] -= 1;
  }
  std::int64_t running = 0;
  for (Round t = 1; t <= horizon; ++t) {
    running += diff[t];
    cert.sigma[t - 1] = running;
    cert.sigma_max = std::max(cert.sigma_max, running);
  }
  return cert;
}

bool delay_backlog_inequality_holds(std::int64_t sigma_max, std::int64_t total_delay) {
  return 2 * total_delay >= sigma_max * (sigma_max + 1);
}

}  // namespace desapo
