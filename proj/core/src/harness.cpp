#include "desapo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <numeric>
#include <thread>

#include "desapo/scheduler.hpp"

namespace desapo {

std::string to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Desapo: return "desapo";
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::Exp3: return "exp3-delayed";
  }
  return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "desapo") return PolicyKind::Desapo;
  if (name == "uniform") return PolicyKind::Uniform;
  if (name == "exp3-delayed") return PolicyKind::Exp3;
  throw ConfigError("algo.policy: expected desapo, uniform or exp3-delayed, got \"" + name + "\"");
}

void RunConfig::validate() const {
  if (num_arms < 1) throw ConfigError("env.K must be >= 1");
  if (horizon < 2) throw ConfigError("run.T must be >= 2");
  if (horizon < static_cast<Round>(num_arms)) throw ConfigError("run.T must be >= env.K");
  loss.validate(num_arms, horizon);
  delay.validate(horizon);
  sapo.constants.validate();
  make_fallback(sapo.fallback, num_arms, horizon);
}

std::uint64_t hash_probabilities(const std::vector<double>& probs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double p : probs) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &p, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

constexpr std::uint64_t kPolicyStream = 0x504f4c49ULL;  // "POLI"

class Learner {
 public:
  virtual ~Learner() = default;
  virtual const std::vector<double>& begin_round(Round t, std::span<const RoundRecord> arrivals,
                                                 std::int64_t sigma_max) = 0;
};

class UniformLearner final : public Learner {
 public:
  explicit UniformLearner(std::size_t k) : probs_(k, 1.0 / static_cast<double>(k)) {}
  const std::vector<double>& begin_round(Round, std::span<const RoundRecord>, std::int64_t) override {
    return probs_;
  }

 private:
  std::vector<double> probs_;
};

class Exp3Learner final : public Learner {
 public:
  Exp3Learner(std::size_t k, Round horizon) : exp3_(k, horizon) { exp3_.activate(1); }
  const std::vector<double>& begin_round(Round t, std::span<const RoundRecord> arrivals,
                                         std::int64_t) override {
    for (const auto& rec : arrivals) exp3_.feed(rec);
    probs_ = exp3_.choose(t);
    return probs_;
  }

 private:
  DelayedExp3 exp3_;
  std::vector<double> probs_;
};

class SapoLearner final : public Learner {
 public:
  SapoLearner(std::size_t k, Round horizon, const SapoOptions& options)
      : sapo_(k, horizon, options) {}
  const std::vector<double>& begin_round(Round t, std::span<const RoundRecord> arrivals,
                                         std::int64_t sigma_max) override {
    return sapo_.begin_round(t, arrivals, sigma_max);
  }
  DelayedSapo& sapo() { return sapo_; }

 private:
  DelayedSapo sapo_;
};

void check_phase_products(const DelayedSapo& sapo, RunDiagnostics& diag) {
  for (ArmIndex i = 0; i < sapo.num_arms(); ++i) {
    const auto& a = sapo.arm(i);
    if (a.status != ArmStatus::Eliminated) continue;
    const auto& snap = a.monitor->snapshot();
    const double expected = snap.p1 * snap.n1;
    const double actual = a.monitor->probability() * a.monitor->phase().n_cap;
    diag.max_phase_product_error =
        std::max(diag.max_phase_product_error, std::abs(actual - expected) / expected);
    ++diag.phase_product_checks;
  }
}

}  // namespace

RunTrace run_once(const RunConfig& config, std::uint64_t seed, RunOptions options) {
  config.validate();
  const std::size_t k = config.num_arms;
  const Round horizon = config.horizon;

  std::unique_ptr<Learner> learner;
  SapoLearner* sapo_learner = nullptr;
  int guard_events = 0;
  switch (config.policy) {
    case PolicyKind::Uniform: learner = std::make_unique<UniformLearner>(k); break;
    case PolicyKind::Exp3: learner = std::make_unique<Exp3Learner>(k, horizon); break;
    case PolicyKind::Desapo: {
      auto s = std::make_unique<SapoLearner>(k, horizon, config.sapo);
      s->sapo().set_observer([&guard_events](const SapoEvent& e) {
        if (e.kind == SapoEvent::Kind::ActiveSetGuard) ++guard_events;
      });
      sapo_learner = s.get();
      learner = std::move(s);
      break;
    }
  }

  std::mt19937_64 rng(mix64(seed ^ mix64(kPolicyStream)));
  DelayLedger ledger;
  RunTrace trace;
  trace.seed = seed;
  trace.horizon = horizon;
  trace.num_arms = k;
  if (options.record_rows) trace.rows.reserve(static_cast<std::size_t>(horizon));

  std::vector<double> arm_loss(k, 0.0);
  std::vector<double> arm_mean(k, 0.0);
  std::vector<std::int64_t> pulls(k, 0);
  double played_loss = 0.0;
  double played_mean = 0.0;
  auto& diag = trace.diagnostics;

  for (Round t = 1; t <= horizon; ++t) {
    const auto arrivals = ledger.arrivals_at(t);
    const auto& probs = learner->begin_round(t, arrivals, ledger.sigma_max());

    double total = 0.0;
    for (double p : probs) {
      total += p;
      diag.min_probability = std::min(diag.min_probability, p);
    }
    diag.max_prob_sum_error = std::max(diag.max_prob_sum_error, std::abs(total - 1.0));
    if (sapo_learner) check_phase_products(sapo_learner->sapo(), diag);

    const ArmIndex arm = sample_categorical(probs, rng);
    const double loss = config.loss.loss_at(t, arm, seed);
    const Round delay = config.delay.delay_at(t, seed);
    ledger.submit(RoundRecord{t, arm, loss, probs[arm], delay});
    ++pulls[arm];

    for (ArmIndex i = 0; i < k; ++i) {
      arm_loss[i] += config.loss.loss_at(t, i, seed);
      arm_mean[i] += config.loss.mean_at(t, i);
    }
    played_loss += loss;
    played_mean += config.loss.mean_at(t, arm);
    trace.adversarial_regret = played_loss - *std::min_element(arm_loss.begin(), arm_loss.end());
    trace.pseudo_regret = played_mean - *std::min_element(arm_mean.begin(), arm_mean.end());

    if (options.record_rows) {
      const bool switched = sapo_learner && sapo_learner->sapo().switched();
      trace.rows.push_back(TraceRow{t, arm, hash_probabilities(probs), ledger.sigma_now(), switched,
                                    trace.pseudo_regret, trace.adversarial_regret});
    }
  }

  trace.sigma_max = ledger.sigma_max();
  trace.total_delay = ledger.total_delay();
  diag.guard_events = guard_events;
  trace.arms.resize(k);
  for (ArmIndex i = 0; i < k; ++i) trace.arms[i].pulls = pulls[i];

  if (sapo_learner) {
    const auto& sapo = sapo_learner->sapo();
    trace.switch_round = sapo.switch_round();
    trace.switch_reason = sapo.switch_reason();
    trace.suppressed_switch_round = sapo.suppressed_switch_round();
    for (ArmIndex i = 0; i < k; ++i) {
      const auto& a = sapo.arm(i);
      auto& out = trace.arms[i];
      out.status = a.status;
      out.flagged_at = a.flagged_at;
      out.ghost_pulls = a.ghost_pulls;
      if (const auto* snap = a.snapshot()) out.snapshot = *snap;
      if (a.monitor) {
        out.tau = a.monitor->snapshot().tau;
        out.phases = a.monitor->phase().r;
        out.errors = a.monitor->phase().error_count;
      }
    }
  }
  return trace;
}

const std::vector<std::string>& lemma_names() {
  static const std::vector<std::string> names = {
      "optimal_kept",  "gap_bracket",         "elimination_order", "phase_count",
      "delay_backlog", "scheduler_agreement", "ghost_pull_bound",
  };
  return names;
}

std::vector<std::string> LemmaReport::violations() const {
  std::vector<std::string> out;
  const std::optional<bool> flags[] = {optimal_kept,  gap_bracket,         elimination_order,
                                       phase_count,   delay_backlog,       scheduler_agreement,
                                       ghost_pull_bound};
  for (std::size_t i = 0; i < lemma_names().size(); ++i) {
    if (flags[i].has_value() && !*flags[i]) out.push_back(lemma_names()[i]);
  }
  return out;
}

LemmaReport lemma_oracles(const RunTrace& trace, const RunConfig& config) {
  LemmaReport report;
  const double log_t = log_horizon(trace.horizon, config.sapo.constants.log_base);

  for (const auto& a : trace.arms) {
    if (a.tau && a.phases > 7.0 * log_t + 1.0) report.phase_count = false;
  }

  const auto delays = config.delay.realize(trace.horizon, trace.seed);
  const auto sweep = sigma_d_sweep(delays);
  report.delay_backlog = delay_backlog_inequality_holds(sweep.sigma_max, sweep.total_delay);
  report.scheduler_agreement =
      sweep.sigma_max == trace.sigma_max && sweep.total_delay == trace.total_delay;

  if (config.sapo.variant == Variant::Ghost) {
    bool ok = true;
    bool any = false;
    for (const auto& a : trace.arms) {
      if (!a.tau || !a.snapshot) continue;
      any = true;
      if (a.ghost_pulls > 1600 * a.snapshot->n_at_elim) ok = false;
    }
    if (any) report.ghost_pull_bound = ok;
  }

  if (!config.loss.stochastic()) return report;

  std::vector<double> gaps(trace.num_arms);
  double best = 1.0;
  for (ArmIndex i = 0; i < trace.num_arms; ++i) best = std::min(best, config.loss.mean_at(1, i));
  for (ArmIndex i = 0; i < trace.num_arms; ++i) gaps[i] = config.loss.mean_at(1, i) - best;

  report.optimal_kept = true;
  report.gap_bracket = true;
  report.elimination_order = true;
  for (ArmIndex i = 0; i < trace.num_arms; ++i) {
    const auto& a = trace.arms[i];
    if (!a.flagged_at || !a.snapshot) continue;
    if (gaps[i] == 0.0) report.optimal_kept = false;
    const double dt = a.snapshot->delta_tilde;
    if (!(dt <= gaps[i] && gaps[i] <= 2.0 * dt)) report.gap_bracket = false;
    for (ArmIndex j = 0; j < trace.num_arms; ++j) {
      const auto& b = trace.arms[j];
      if (!b.flagged_at || *a.flagged_at >= *b.flagged_at) continue;
      if (gaps[j] > 20.0 * gaps[i]) report.elimination_order = false;
    }
  }
  return report;
}

BatchSummary summarize(const std::vector<RunTrace>& traces, const std::vector<LemmaReport>& reports) {
  std::vector<std::size_t> order(traces.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return traces[a].seed < traces[b].seed; });

  BatchSummary s;
  for (const auto& name : lemma_names()) s.lemma_violations[name] = 0;
  if (traces.empty()) return s;

  const double n = static_cast<double>(traces.size());
  double switches = 0.0;
  for (std::size_t idx : order) {
    const auto& tr = traces[idx];
    s.seeds.push_back(tr.seed);
    s.mean_pseudo_regret += tr.pseudo_regret;
    s.mean_adv_regret += tr.adversarial_regret;
    if (tr.switch_round) switches += 1.0;
    if (idx < reports.size()) {
      for (const auto& v : reports[idx].violations()) ++s.lemma_violations[v];
    }
  }
  s.mean_pseudo_regret /= n;
  s.mean_adv_regret /= n;
  s.switch_rate = switches / n;
  if (traces.size() > 1) {
    double sp = 0.0;
    double sa = 0.0;
    for (std::size_t idx : order) {
      sp += std::pow(traces[idx].pseudo_regret - s.mean_pseudo_regret, 2);
      sa += std::pow(traces[idx].adversarial_regret - s.mean_adv_regret, 2);
    }
    s.std_pseudo_regret = std::sqrt(sp / (n - 1.0));
    s.std_adv_regret = std::sqrt(sa / (n - 1.0));
  }
  return s;
}

BatchResult run_batch(const RunConfig& config, std::vector<std::uint64_t> seeds, BatchOptions options) {
  if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
  config.validate();
  std::sort(seeds.begin(), seeds.end());
  if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
    throw ConfigError("run.seeds contains duplicates");
  }

  std::vector<RunTrace> traces(seeds.size());
  std::vector<LemmaReport> reports(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        traces[i] = run_once(config, seeds[i], options.run);
        reports[i] = lemma_oracles(traces[i], config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, seeds.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw BatchError(seeds[i], e.what(), errors[i]);
    }
  }

  BatchResult result;
  result.summary = summarize(traces, reports);
  result.traces = std::move(traces);
  result.reports = std::move(reports);
  return result;
}

}  // namespace desapo
