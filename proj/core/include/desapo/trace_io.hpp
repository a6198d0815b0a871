#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "desapo/harness.hpp"

namespace desapo {

// Columns: t,arm,sigma_t,switched,cum_pseudo_regret,cum_adv_regret.
// With every > 1 only rounds divisible by `every` and the final round are
// written; the final row is always exact.
void write_trace_csv(std::ostream& out, const RunTrace& trace, Round every = 1);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, Round every = 1);

// Summary sidecar: seeds, mean_pseudo_regret, std_pseudo_regret,
// mean_adv_regret, switch_rate, lemma_violations{name: count}, plus the
// per-seed finals under "runs".
std::string summary_to_json(const BatchResult& batch);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace desapo
