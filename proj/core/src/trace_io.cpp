#include "desapo/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>

namespace desapo {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, Round every) {
  if (every < 1) every = 1;
  out << "t,arm,sigma_t,switched,cum_pseudo_regret,cum_adv_regret\n";
  for (const auto& row : trace.rows) {
    if (row.t % every != 0 && row.t != trace.horizon) continue;
    out << row.t << ',' << row.arm << ',' << row.sigma << ',' << (row.switched ? 1 : 0) << ','
        << format_double(row.cum_pseudo_regret) << ',' << format_double(row.cum_adv_regret) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, Round every) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, trace, every);
}

namespace {

nlohmann::json optional_round(const std::optional<Round>& r) {
  return r ? nlohmann::json(*r) : nlohmann::json(nullptr);
}

nlohmann::json run_to_json(const RunTrace& tr, const LemmaReport& report) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& a : tr.arms) {
    nlohmann::json j = {
        {"status", to_string(a.status)},
        {"flagged_at", optional_round(a.flagged_at)},
        {"tau", optional_round(a.tau)},
        {"phases", a.phases},
        {"errors", a.errors},
        {"ghost_pulls", a.ghost_pulls},
        {"pulls", a.pulls},
    };
    if (a.snapshot) {
      j["delta_tilde"] = a.snapshot->delta_tilde;
      j["mu_tilde"] = a.snapshot->mu_tilde;
      j["n_at_elim"] = a.snapshot->n_at_elim;
      j["p1"] = a.snapshot->p1;
      j["n1"] = a.snapshot->n1;
    }
    arms.push_back(std::move(j));
  }
  return {
      {"seed", tr.seed},
      {"pseudo_regret", tr.pseudo_regret},
      {"adversarial_regret", tr.adversarial_regret},
      {"switch_round", optional_round(tr.switch_round)},
      {"switch_reason", to_string(tr.switch_reason)},
      {"sigma_max", tr.sigma_max},
      {"total_delay", tr.total_delay},
      {"lemma_violations", report.violations()},
      {"arms", std::move(arms)},
  };
}

}  // namespace

std::string summary_to_json(const BatchResult& batch) {
  const auto& s = batch.summary;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < batch.traces.size(); ++i) {
    runs.push_back(run_to_json(batch.traces[i], i < batch.reports.size() ? batch.reports[i] : LemmaReport{}));
  }
  nlohmann::json j = {
      {"seeds", s.seeds},
      {"mean_pseudo_regret", s.mean_pseudo_regret},
      {"std_pseudo_regret", s.std_pseudo_regret},
      {"mean_adv_regret", s.mean_adv_regret},
      {"std_adv_regret", s.std_adv_regret},
      {"switch_rate", s.switch_rate},
      {"lemma_violations", s.lemma_violations},
      {"runs", std::move(runs)},
  };
  return j.dump(2);
}

}  // namespace desapo
