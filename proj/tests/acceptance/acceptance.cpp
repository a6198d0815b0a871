// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "desapo/harness.hpp"
#include "desapo/scheduler.hpp"
#include "desapo/stats.hpp"
#include "desapo/trace_io.hpp"
#include "desapo_cli/commands.hpp"

using namespace desapo;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok: " : "FAILED: ") + what);
  }
};

std::string fmt(double v, int precision = 1) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::vector<std::uint64_t> seed_range(std::uint64_t start, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), start);
  return s;
}

BatchResult batch(const RunConfig& cfg, std::vector<std::uint64_t> seeds) {
  return run_batch(cfg, std::move(seeds), BatchOptions{0, RunOptions{false}});
}

RunConfig five_arm(Round horizon, Round delay) {
  RunConfig c;
  c.num_arms = 5;
  c.horizon = horizon;
  c.loss = LossModel(BernoulliLosses{{0.1, 0.3, 0.5, 0.7, 0.9}});
  c.delay = DelayModel(FixedDelay{delay});
  return c;
}

// ---------------------------------------------------------------------------
// 1. Deterministic invariants

// Straight from the definition of σ(t): count τ <= t with τ + d_τ > t.
std::vector<std::int64_t> sigma_by_definition(const std::vector<Round>& d) {
  const std::size_t n = d.size();
  std::vector<std::int64_t> sigma(n, 0);
  for (std::size_t t = 1; t <= n; ++t) {
    std::int64_t c = 0;
    for (std::size_t tau = 1; tau <= t; ++tau) c += static_cast<Round>(tau) + d[tau - 1] > static_cast<Round>(t);
    sigma[t - 1] = c;
  }
  return sigma;
}

struct NaiveArm {
  double ucb, lcb, oucb, olcb;
};

void criterion_deterministic(Verdict& v) {
  std::mt19937_64 rng(20240601);

  int sched_mismatch = 0, backlog_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + rng() % 2000;
    const std::uint64_t cap = trial % 3 == 0 ? 5 : trial % 3 == 1 ? 200 : 5000;
    std::vector<Round> d(len);
    for (auto& x : d) x = static_cast<Round>(rng() % (cap + 1));

    DelayLedger ledger;
    std::vector<std::int64_t> live;
    for (Round t = 1; t <= static_cast<Round>(len); ++t) {
      ledger.arrivals_at(t);
      ledger.submit(RoundRecord{t, 0, 0.0, 1.0, d[static_cast<std::size_t>(t - 1)]});
      live.push_back(ledger.sigma_now());
    }
    const auto naive = sigma_d_certificate(d);
    const std::int64_t d_sum = std::accumulate(d.begin(), d.end(), std::int64_t{0});
    const auto sigma = trial < 100 ? sigma_by_definition(d) : naive.sigma;
    const std::int64_t smax = *std::max_element(sigma.begin(), sigma.end());
    if (live != sigma || naive.sigma != sigma || ledger.sigma_max() != smax || naive.sigma_max != smax ||
        ledger.total_delay() != d_sum || naive.total_delay != d_sum) {
      ++sched_mismatch;
    }
    if (!(2 * d_sum >= smax * (smax + 1))) ++backlog_fail;
  }
  v.require(sched_mismatch == 0, "ledger vs naive scan on sigma(t), sigma_max, D over 1000 vectors (mismatches: " +
                                     std::to_string(sched_mismatch) + ")");
  v.require(backlog_fail == 0, "D >= sigma_max(sigma_max+1)/2 on all 1000 vectors");

  // Incremental statistics vs. recomputation over every prefix, exact equality.
  int stats_mismatch = 0, monotone_fail = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 1 + trial % 6;
    const std::size_t len = 1 + rng() % 500;
    const Round horizon = static_cast<Round>(len + rng() % 2000);
    std::vector<Round> rounds(len);
    std::iota(rounds.begin(), rounds.end(), Round{1});
    std::shuffle(rounds.begin(), rounds.end(), rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RoundRecord> recs;
    for (Round r : rounds) {
      recs.push_back(RoundRecord{r, static_cast<ArmIndex>(rng() % k), trial % 2 ? u(rng) : std::round(u(rng)),
                                 std::ldexp(1.0, -static_cast<int>(rng() % 5)), 0});
    }
    ProcessedLog log(k, horizon);
    const double log_t = std::log(static_cast<double>(horizon)) / std::log(2.0);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<NaiveArm> naive(k, NaiveArm{inf, -inf, inf, -inf});
    double naive_star = 1.0;
    std::vector<std::int64_t> n(k, 0);
    std::vector<double> sum(k, 0.0), is(k, 0.0);
    std::vector<NaiveArm> prev = naive;
    double prev_star = 1.0;
    for (std::size_t j = 0; j < len; ++j) {
      log.append(recs[j]);
      n[recs[j].arm] += 1;
      sum[recs[j].arm] += recs[j].loss;
      is[recs[j].arm] += recs[j].loss / recs[j].probability;
      const double s_len = static_cast<double>(j + 1);
      const double ow = std::min(1.0, std::sqrt(2.0 * static_cast<double>(k) * log_t / s_len));
      double best = inf;
      for (std::size_t i = 0; i < k; ++i) {
        const double mu = n[i] ? sum[i] / static_cast<double>(n[i]) : 0.0;
        const double w = n[i] ? std::min(1.0, std::sqrt(2.0 * log_t / static_cast<double>(n[i]))) : 1.0;
        naive[i].ucb = std::min(naive[i].ucb, n[i] ? mu + w : 1.0);
        naive[i].lcb = std::max(naive[i].lcb, n[i] ? mu - w : 0.0);
        const double mb = std::clamp(is[i] / s_len, 0.0, 1.0);
        naive[i].oucb = std::min(naive[i].oucb, mb + ow);
        naive[i].olcb = std::max(naive[i].olcb, mb - ow);
        best = std::min({best, naive[i].ucb, naive[i].oucb});
        if (log.ucb(i) != naive[i].ucb || log.lcb(i) != naive[i].lcb || log.oucb(i) != naive[i].oucb ||
            log.olcb(i) != naive[i].olcb) {
          ++stats_mismatch;
        }
        if (log.ucb(i) > prev[i].ucb || log.lcb(i) < prev[i].lcb || log.oucb(i) > prev[i].oucb ||
            log.olcb(i) < prev[i].olcb) {
          ++monotone_fail;
        }
      }
      naive_star = std::min(naive_star, best);
      if (log.ucb_star() != naive_star) ++stats_mismatch;
      if (log.ucb_star() > prev_star) ++monotone_fail;
      prev = naive;
      prev_star = log.ucb_star();
      for (std::size_t i = 0; i < k; ++i) {
        prev[i] = NaiveArm{log.ucb(i), log.lcb(i), log.oucb(i), log.olcb(i)};
      }
    }
  }
  v.require(stats_mismatch == 0, "incremental vs naive stats, exact, 60 logs of length <= 500 (mismatches: " +
                                     std::to_string(stats_mismatch) + ")");
  v.require(monotone_fail == 0, "ucb*/ucb/oucb non-increasing and lcb/olcb non-decreasing on every append");

  // Every round of a spread of runs: probability sum and phase product.
  std::vector<RunConfig> configs;
  configs.push_back(five_arm(20000, 100));
  configs.push_back(five_arm(20000, 0));
  {
    auto c = five_arm(20000, 30);
    c.sapo.variant = Variant::Ghost;
    configs.push_back(c);
  }
  {
    RunConfig c;
    c.num_arms = 3;
    c.horizon = 20000;
    c.loss = LossModel(FlipLosses{{0.1, 0.5, 0.9}, {0.9, 0.5, 0.1}, 10001});
    c.delay = DelayModel(GeometricCappedDelay{20.0, 200});
    c.sapo.constants = ConstantsProfile::aggressive();
    configs.push_back(c);
    c.sapo.allow_switch = false;
    configs.push_back(c);
  }
  {
    RunConfig c;
    c.num_arms = 2;
    c.horizon = 20000;
    c.loss = LossModel(BernoulliLosses{{0.05, 0.95}});
    c.delay = DelayModel(SpikeDelay{2, 3000, {10, 500, 7000}});
    configs.push_back(c);
  }
  double worst_sum = 0.0, worst_product = 0.0, min_prob = 1.0;
  std::int64_t product_checks = 0;
  for (const auto& c : configs) {
    const auto r = batch(c, seed_range(1, 3));
    for (const auto& tr : r.traces) {
      worst_sum = std::max(worst_sum, tr.diagnostics.max_prob_sum_error);
      worst_product = std::max(worst_product, tr.diagnostics.max_phase_product_error);
      min_prob = std::min(min_prob, tr.diagnostics.min_probability);
      product_checks += tr.diagnostics.phase_product_checks;
    }
  }
  v.require(product_checks > 0 && worst_product <= 1e-9,
            "phase product p*N = p1*N1 at every round (" + std::to_string(product_checks) +
                " checks, worst relative error " + format_double(worst_product) + ")");
  v.require(worst_sum <= 1e-12 && min_prob > 0.0,
            "probability vectors sum to 1 within 1e-12 (worst " + format_double(worst_sum) + "), all entries > 0");
}

// ---------------------------------------------------------------------------
// 2. Stochastic lemma suite

void criterion_lemmas(Verdict& v) {
  const auto cfg = five_arm(50000, 100);
  const auto r = batch(cfg, seed_range(1, 50));
  int no_switch = 0, kept = 0, bracket = 0, order = 0, phases = 0;
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    const auto& rep = r.reports[i];
    no_switch += !r.traces[i].switch_round.has_value();
    kept += rep.optimal_kept.value_or(true);
    bracket += rep.gap_bracket.value_or(true);
    order += rep.elimination_order.value_or(true);
    phases += rep.phase_count;
  }
  int eliminated = 0;
  for (const auto& tr : r.traces)
    for (const auto& a : tr.arms) eliminated += a.flagged_at.has_value();
  v.require(no_switch >= 45, "no switch in " + std::to_string(no_switch) + "/50 (need >= 45)");
  v.require(kept >= 48, "optimal arm never eliminated in " + std::to_string(kept) + "/50 (need >= 48)");
  v.require(bracket >= 45, "gap estimate bracket in " + std::to_string(bracket) + "/50 (need >= 45)");
  v.require(order >= 48, "elimination order factor-20 rule in " + std::to_string(order) + "/50 (need >= 48)");
  v.require(phases == 50, "phase count r_i <= 7 log2 T + 1 in " + std::to_string(phases) + "/50 (need 50)");
  v.notes.push_back("info: " + std::to_string(eliminated) + " eliminations across 50 seeds, mean pseudo-regret " +
                    fmt(r.summary.mean_pseudo_regret));
}

// ---------------------------------------------------------------------------
// 3. Stochastic regret scaling

void criterion_scaling(Verdict& v) {
  const std::vector<Round> horizons = {12500, 25000, 50000};
  std::vector<double> means;
  for (Round t : horizons) means.push_back(batch(five_arm(t, 100), seed_range(1, 50)).summary.mean_pseudo_regret);
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
    const double ratio = means[i + 1] / means[i];
    v.require(ratio <= 1.5, "R(" + std::to_string(horizons[i + 1]) + ")/R(" + std::to_string(horizons[i]) +
                                ") = " + fmt(means[i + 1]) + "/" + fmt(means[i]) + " = " + fmt(ratio, 3) +
                                " (need <= 1.5)");
  }
  // Elimination needs mean - 9 width > ucb*, roughly gap > 10 width, i.e.
  // n >= 2 log2 T (10 / gap)^2 pulls of the arm. For the largest gap this
  // bounds the earliest elimination round from below.
  for (Round t : horizons) {
    const double n = 2.0 * std::log2(static_cast<double>(t)) * std::pow(10.0 / 0.8, 2);
    v.notes.push_back("info: T=" + std::to_string(t) + ": the 0.9 arm needs about " + fmt(n, 0) +
                      " observed pulls to be eliminated, about round " + fmt(5.0 * n, 0) + " under uniform play");
  }
  const double slow = batch(five_arm(50000, 1000), seed_range(1, 50)).summary.mean_pseudo_regret;
  const double fast = batch(five_arm(50000, 0), seed_range(1, 50)).summary.mean_pseudo_regret;
  const double allowance = 20.0 * (1000.0 * 0.5 * std::log2(5.0));
  v.require(slow - fast <= allowance, "delay penalty R[d=1000] - R[d=0] = " + fmt(slow) + " - " + fmt(fast) + " = " +
                                          fmt(slow - fast) + " (need <= " + fmt(allowance) + ")");
}

// ---------------------------------------------------------------------------
// 4. Adversarial detection

void criterion_detection(Verdict& v) {
  RunConfig cfg;
  cfg.num_arms = 3;
  cfg.horizon = 50000;
  const Round flip = cfg.horizon / 2 + 1;
  cfg.loss = LossModel(FlipLosses{{0.1, 0.5, 0.9}, {0.9, 0.5, 0.1}, flip});
  cfg.delay = DelayModel(FixedDelay{50});
  cfg.sapo.constants = ConstantsProfile::aggressive();
  auto frozen = cfg;
  frozen.sapo.allow_switch = false;

  const auto seeds = seed_range(1, 30);
  const auto live = batch(cfg, seeds);
  const auto never = batch(frozen, seeds);
  int after_flip = 0, before_flip = 0, better = 0;
  Round earliest = cfg.horizon, latest = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& tr = live.traces[i];
    if (tr.switch_round) {
      (*tr.switch_round >= flip ? after_flip : before_flip) += 1;
      earliest = std::min(earliest, *tr.switch_round);
      latest = std::max(latest, *tr.switch_round);
    }
    better += tr.adversarial_regret <= never.traces[i].adversarial_regret;
  }
  v.require(after_flip >= 27, "switch after the flip (round >= " + std::to_string(flip) + ") in " +
                                  std::to_string(after_flip) + "/30 (need >= 27; " + std::to_string(before_flip) +
                                  " switched before it, switch rounds " + std::to_string(earliest) + ".." +
                                  std::to_string(latest) + ")");
  v.require(better >= 24, "adversarial regret <= never-switch run in " + std::to_string(better) +
                              "/30 (need >= 24; means " + fmt(live.summary.mean_adv_regret) + " vs " +
                              fmt(never.summary.mean_adv_regret) + ")");
}

// ---------------------------------------------------------------------------
// 5. Ghost variant differential

void criterion_ghost(Verdict& v) {
  auto base_cfg = five_arm(50000, 100);
  auto ghost_cfg = base_cfg;
  ghost_cfg.sapo.variant = Variant::Ghost;
  const auto seeds = seed_range(1, 50);
  const double base = batch(base_cfg, seeds).summary.mean_pseudo_regret;
  const auto ghost = batch(ghost_cfg, seeds);
  const double ratio = ghost.summary.mean_pseudo_regret / base;
  v.require(ratio <= 2.0 && ratio >= 0.5, "ghost/base mean pseudo-regret = " + fmt(ghost.summary.mean_pseudo_regret) +
                                              "/" + fmt(base) + " = " + fmt(ratio, 3) + " (need within 2x)");
  int bound = 0, formal = 0;
  for (const auto& rep : ghost.reports) bound += rep.ghost_pull_bound.value_or(true);
  for (const auto& tr : ghost.traces)
    for (const auto& a : tr.arms) formal += a.tau.has_value();
  v.require(bound >= 48, "ghost-period pulls <= 1600 n_i(S~_i) in " + std::to_string(bound) + "/50 (need >= 48; " +
                             std::to_string(formal) + " formal eliminations)");
}

// ---------------------------------------------------------------------------
// 6. Fallback sanity

void criterion_fallback(Verdict& v) {
  RunConfig cfg;
  cfg.num_arms = 2;
  cfg.horizon = 50000;
  cfg.loss = LossModel(BernoulliLosses{{0.3, 0.7}});
  cfg.delay = DelayModel(FixedDelay{0});
  cfg.policy = PolicyKind::Exp3;
  const double mean = batch(cfg, seed_range(1, 20)).summary.mean_pseudo_regret;
  const double ceiling = 4.0 * std::sqrt(2.0 * 50000.0 * std::log2(2.0));
  v.require(mean <= ceiling, "delayed EXP3 mean pseudo-regret " + fmt(mean) + " (need <= " + fmt(ceiling) + ")");
}

// ---------------------------------------------------------------------------
// 7. Determinism and CLI contract

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion_cli(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "desapo_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::ofstream(dir / "config.json") << R"({
    "env": {"K": 3, "loss": {"type": "flip", "means_a": [0.1, 0.5, 0.9], "means_b": [0.9, 0.5, 0.1], "flip_round": 3001},
            "delay": {"type": "geometric", "mean": 10, "cap": 100}},
    "algo": {"profile": "aggressive"},
    "run": {"T": 6000, "seeds": [3, 11]}
  })";
  std::ostringstream sink;
  int codes = 0;
  for (const char* sub : {"a", "b"}) {
    cli::RunArgs args;
    args.config = dir / "config.json";
    args.out_dir = dir / sub;
    args.jobs = std::string(sub) == "a" ? 1 : 2;
    codes += cli::cmd_run(args, sink, sink);
  }
  bool identical = codes == 0;
  for (const char* f : {"trace_seed3.csv", "trace_seed11.csv", "summary.json"}) {
    const auto a = slurp(dir / "a" / f);
    identical = identical && !a.empty() && a == slurp(dir / "b" / f);
  }
  std::ostringstream x, y;
  const auto cfg = five_arm(8000, 25);
  write_trace_csv(x, run_once(cfg, 5));
  write_trace_csv(y, run_once(cfg, 5));
  identical = identical && x.str() == y.str();
  v.require(identical, "identical (config, seed) give byte-identical trace CSVs and summaries");

  std::mt19937_64 rng(77);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    const fs::path p = dir / ("delays_" + std::to_string(i) + ".csv");
    std::ofstream out(p);
    out << "t,delay\n";
    const int len = 1 + static_cast<int>(rng() % 3000);
    const std::uint64_t cap = 1 + rng() % 4000;
    for (int t = 1; t <= len; ++t) out << t << "," << rng() % (cap + 1) << "\n";
    out.close();
    std::ostringstream o, e;
    ok += cli::cmd_oracle(p, o, e) == cli::kExitOk;
  }
  v.require(ok == 100, "oracle exits 0 on " + std::to_string(ok) + "/100 random delay files");
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "deterministic invariants", criterion_deterministic},
      {2, "stochastic-regime lemma suite", criterion_lemmas},
      {3, "stochastic regret scaling", criterion_scaling},
      {4, "adversarial detection", criterion_detection},
      {5, "ghost variant differential", criterion_ghost},
      {6, "fallback sanity", criterion_fallback},
      {7, "determinism and CLI contract", criterion_cli},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " [" << fmt(secs, 2)
              << " s]\n";
    for (const auto& n : v.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
