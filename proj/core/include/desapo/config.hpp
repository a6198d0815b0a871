#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "desapo/harness.hpp"

namespace desapo {

// One experiment file: {"env": {...}, "algo": {...}, "run": {...}}.
//
//   env.K                       number of arms (>= 1)
//   env.loss.type               bernoulli{means} | flip{means_a, means_b, flip_round}
//                               | table{path | rows}
//   env.delay.type              fixed{d} | geometric{mean, cap}
//                               | spike{base, spike, rounds} | table{path | delays}
//   algo.policy                 desapo (default) | uniform | exp3-delayed
//   algo.variant                base (default) | ghost
//   algo.profile                default | aggressive
//   algo.constants.*            per-constant overrides applied on top of the profile
//   algo.fallback               exp3-delayed
//   algo.allow_switch           true (default)
//   algo.append_eliminated_pulls false (default): eliminated arms' own later
//                               pulls feed only their banks
//   run.T                       horizon (>= K)
//   run.seeds                   [s, ...] or {"start": s, "count": n}
//   run.output_dir, run.trace_every
struct ExperimentConfig {
  RunConfig run;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  Round trace_every = 1;
  std::string profile = "default";
  // Table sources kept by path so the echoed config stays small.
  std::optional<std::string> loss_path;
  std::optional<std::string> delay_path;
};

// Throws ConfigError whose message starts with the offending field path.
// Relative table paths resolve against base_dir.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON with every default spelled out; parse_config accepts it
// and yields an equal configuration.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace desapo
