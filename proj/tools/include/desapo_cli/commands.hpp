#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace desapo::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // oracle inequality failed, I/O error
inline constexpr int kExitConfig = 2;   // invalid config or malformed CSV
inline constexpr int kExitRuntime = 3;  // invariant violated during a run

struct RunArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out_dir;
  unsigned jobs = 0;
  // Added to every seed; the entry point fills it from DESAPO_SEED_OFFSET.
  std::int64_t seed_offset = 0;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_oracle(const std::filesystem::path& delays_csv, std::ostream& out, std::ostream& err);
int cmd_print_config(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

// Full argv dispatch, used by the executable and by tests.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace desapo::cli
