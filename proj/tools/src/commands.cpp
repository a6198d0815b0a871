#include "desapo_cli/commands.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "desapo/config.hpp"
#include "desapo/scheduler.hpp"
#include "desapo/trace_io.hpp"

namespace desapo::cli {

namespace {

std::optional<std::int64_t> parse_offset(const char* text) {
  if (text == nullptr || *text == '\0') return 0;
  std::string_view s(text);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void print_table(const BatchResult& batch, std::ostream& out) {
  out << std::left << std::setw(12) << "seed" << std::setw(16) << "pseudo_regret" << std::setw(16)
      << "adv_regret" << std::setw(10) << "switch" << "sigma_max\n";
  for (const auto& tr : batch.traces) {
    out << std::setw(12) << tr.seed << std::setw(16) << fixed2(tr.pseudo_regret) << std::setw(16)
        << fixed2(tr.adversarial_regret) << std::setw(10)
        << (tr.switch_round ? std::to_string(*tr.switch_round) : std::string("-")) << tr.sigma_max << "\n";
  }
  const auto& s = batch.summary;
  out << "\nseeds: " << s.seeds.size() << "  mean pseudo-regret: " << format_double(s.mean_pseudo_regret)
      << " (std " << format_double(s.std_pseudo_regret) << ")"
      << "  mean adv-regret: " << format_double(s.mean_adv_regret) << "  switch rate: " << format_double(s.switch_rate)
      << "\n";
  bool any = false;
  for (const auto& [name, count] : s.lemma_violations) {
    if (count == 0) continue;
    out << (any ? ", " : "lemma violations: ") << name << "=" << count;
    any = true;
  }
  out << (any ? "\n" : "lemma violations: none\n");
}

int classify(std::exception_ptr cause, std::ostream& err) {
  try {
    std::rethrow_exception(cause);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::logic_error& e) {
    // ProtocolError and InvariantError.
    err << "invariant violation: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(args.config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (auto& s : cfg.seeds) s += static_cast<std::uint64_t>(args.seed_offset);
  const std::filesystem::path dir = args.out_dir ? *args.out_dir : std::filesystem::path(cfg.output_dir);

  BatchResult batch;
  try {
    batch = run_batch(cfg.run, cfg.seeds, BatchOptions{args.jobs, RunOptions{true}});
  } catch (const BatchError& e) {
    err << "run failed for seed " << e.seed() << "\n";
    return classify(e.cause(), err);
  } catch (...) {
    return classify(std::current_exception(), err);
  }

  try {
    std::filesystem::create_directories(dir);
    for (const auto& tr : batch.traces) {
      write_trace_csv(dir / ("trace_seed" + std::to_string(tr.seed) + ".csv"), tr, cfg.trace_every);
    }
    std::ofstream js(dir / "summary.json");
    if (!js) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    js << summary_to_json(batch) << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  print_table(batch, out);
  out << "wrote " << batch.traces.size() << " trace(s) and summary.json to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_oracle(const std::filesystem::path& delays_csv, std::ostream& out, std::ostream& err) {
  std::vector<Round> delays;
  try {
    delays = load_delay_csv(delays_csv);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto cert = sigma_d_sweep(delays);
  const bool holds = delay_backlog_inequality_holds(cert.sigma_max, cert.total_delay);
  out << "T=" << delays.size() << "\n";
  out << "sigma_max=" << cert.sigma_max << "\n";
  out << "D=" << cert.total_delay << "\n";
  out << "D >= sigma_max(sigma_max+1)/2: " << (holds ? "holds" : "FAILS") << "\n";
  return holds ? kExitOk : kExitFailure;
}

int cmd_print_config(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  try {
    out << config_to_json(load_config(config)) << "\n";
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed-feedback best-of-both-worlds bandit experiments", "desapo"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run every seed of an experiment config");
  run->add_option("config", run_args.config, "experiment config (JSON)")->required();
  run->add_option("--jobs,-j", run_args.jobs, "parallel runs (default: available cores)");
  run->add_option("--out,-o", out_dir, "output directory (overrides run.output_dir)");

  std::filesystem::path delays;
  auto* oracle = app.add_subcommand("oracle", "check D >= sigma_max(sigma_max+1)/2 for a delay CSV");
  oracle->add_option("delays", delays, "CSV with header t,delay")->required();

  std::filesystem::path print_path;
  auto* print = app.add_subcommand("print-config", "echo a config with all defaults filled in");
  print->add_option("config", print_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    const auto offset = parse_offset(std::getenv("DESAPO_SEED_OFFSET"));
    if (!offset) {
      err << "error: DESAPO_SEED_OFFSET must be an integer\n";
      return kExitConfig;
    }
    run_args.seed_offset = *offset;
    if (!out_dir.empty()) run_args.out_dir = out_dir;
    if (run_args.jobs == 0) run_args.jobs = std::max(1u, std::thread::hardware_concurrency());
    return cmd_run(run_args, out, err);
  }
  if (oracle->parsed()) return cmd_oracle(delays, out, err);
  return cmd_print_config(print_path, out, err);
}

}  // namespace desapo::cli
