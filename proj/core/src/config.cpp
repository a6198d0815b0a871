#include "desapo/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace desapo {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ConfigError(field(key) + ": missing required key \"" + key + "\"");
    return node_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  Reader child(const std::string& key) { return Reader(at(key), field(key)); }

  // Unknown keys are errors so typos do not silently fall back to defaults.
  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown key \"" + key + "\"");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal().string();
}

LossModel parse_loss(Reader r, const std::filesystem::path& base, ExperimentConfig& cfg) {
  const auto type = r.get<std::string>("type");
  LossModel model;
  if (type == "bernoulli") {
    model = LossModel(BernoulliLosses{r.get<std::vector<double>>("means")});
  } else if (type == "flip") {
    model = LossModel(FlipLosses{r.get<std::vector<double>>("means_a"),
                                 r.get<std::vector<double>>("means_b"), r.get<Round>("flip_round")});
  } else if (type == "table") {
    if (r.has("path")) {
      cfg.loss_path = resolve(r.get<std::string>("path"), base);
      model = LossModel(load_loss_table_csv(*cfg.loss_path));
    } else {
      model = LossModel(TableLosses{r.get<std::vector<std::vector<double>>>("rows")});
    }
  } else {
    throw ConfigError(r.field("type") + ": unknown loss model \"" + type + "\"");
  }
  r.finish();
  return model;
}

DelayModel parse_delay(Reader r, const std::filesystem::path& base, ExperimentConfig& cfg) {
  const auto type = r.get<std::string>("type");
  DelayModel model;
  if (type == "fixed") {
    model = DelayModel(FixedDelay{r.get<Round>("d")});
  } else if (type == "geometric") {
    model = DelayModel(GeometricCappedDelay{r.get<double>("mean"), r.get<Round>("cap")});
  } else if (type == "spike") {
    model = DelayModel(SpikeDelay{r.get<Round>("base"), r.get<Round>("spike"),
                                  r.get<std::vector<Round>>("rounds")});
  } else if (type == "table") {
    if (r.has("path")) {
      cfg.delay_path = resolve(r.get<std::string>("path"), base);
      model = DelayModel(TableDelay{load_delay_csv(*cfg.delay_path)});
    } else {
      model = DelayModel(TableDelay{r.get<std::vector<Round>>("delays")});
    }
  } else {
    throw ConfigError(r.field("type") + ": unknown delay model \"" + type + "\"");
  }
  r.finish();
  return model;
}

void parse_constants(Reader r, ConstantsProfile& c) {
  c.elim_width_mult = r.get_or("elim_width_mult", c.elim_width_mult);
  c.delta_mult = r.get_or("delta_mult", c.delta_mult);
  c.n1_numerator = r.get_or("n1_numerator", c.n1_numerator);
  c.bsc2_sqrt_coeff = r.get_or("bsc2_sqrt_coeff", c.bsc2_sqrt_coeff);
  c.bsc2_sigma_coeff = r.get_or("bsc2_sigma_coeff", c.bsc2_sigma_coeff);
  c.max_errors_mult = r.get_or("max_errors_mult", c.max_errors_mult);
  c.ghost_bsc_coeff = r.get_or("ghost_bsc_coeff", c.ghost_bsc_coeff);
  c.log_base = r.get_or("log_base", c.log_base);
  c.clip_is_mean = r.get_or("clip_is_mean", c.clip_is_mean);
  r.finish();
}

std::vector<std::uint64_t> parse_seeds(Reader& run) {
  const json& node = run.at("seeds");
  std::vector<std::uint64_t> seeds;
  if (node.is_array()) {
    for (const auto& s : node) {
      if (!s.is_number_unsigned()) throw ConfigError("run.seeds: entries must be non-negative integers");
      seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (node.is_object()) {
    Reader r(node, "run.seeds");
    const auto start = r.get<std::uint64_t>("start");
    const auto count = r.get<std::uint64_t>("count");
    r.finish();
    for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(start + i);
  } else {
    throw ConfigError("run.seeds: expected an array or {\"start\", \"count\"}");
  }
  if (seeds.empty()) throw ConfigError("run.seeds: must not be empty");
  return seeds;
}

json loss_to_json(const ExperimentConfig& cfg) {
  const auto& spec = cfg.run.loss.spec();
  if (const auto* b = std::get_if<BernoulliLosses>(&spec)) return {{"type", "bernoulli"}, {"means", b->means}};
  if (const auto* f = std::get_if<FlipLosses>(&spec)) {
    return {{"type", "flip"}, {"means_a", f->means_a}, {"means_b", f->means_b}, {"flip_round", f->flip_round}};
  }
  if (cfg.loss_path) return {{"type", "table"}, {"path", *cfg.loss_path}};
  return {{"type", "table"}, {"rows", std::get<TableLosses>(spec).rows}};
}

json delay_to_json(const ExperimentConfig& cfg) {
  const auto& spec = cfg.run.delay.spec();
  if (const auto* d = std::get_if<FixedDelay>(&spec)) return {{"type", "fixed"}, {"d", d->d}};
  if (const auto* g = std::get_if<GeometricCappedDelay>(&spec)) {
    return {{"type", "geometric"}, {"mean", g->mean}, {"cap", g->cap}};
  }
  if (const auto* s = std::get_if<SpikeDelay>(&spec)) {
    return {{"type", "spike"}, {"base", s->base}, {"spike", s->spike}, {"rounds", s->rounds}};
  }
  if (cfg.delay_path) return {{"type", "table"}, {"path", *cfg.delay_path}};
  return {{"type", "table"}, {"delays", std::get<TableDelay>(spec).delays}};
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  Reader top(root, "");

  Reader env = top.child("env");
  cfg.run.num_arms = env.get<std::size_t>("K");
  cfg.run.loss = parse_loss(env.child("loss"), base_dir, cfg);
  cfg.run.delay = parse_delay(env.child("delay"), base_dir, cfg);
  env.finish();

  if (top.has("algo")) {
    Reader algo = top.child("algo");
    cfg.run.policy = parse_policy(algo.get_or<std::string>("policy", "desapo"));
    cfg.run.sapo.variant = parse_variant(algo.get_or<std::string>("variant", "base"));
    cfg.profile = algo.get_or<std::string>("profile", "default");
    if (cfg.profile == "aggressive") {
      cfg.run.sapo.constants = ConstantsProfile::aggressive();
    } else if (cfg.profile != "default") {
      throw ConfigError("algo.profile: expected default or aggressive, got \"" + cfg.profile + "\"");
    }
    if (algo.has("constants")) parse_constants(algo.child("constants"), cfg.run.sapo.constants);
    cfg.run.sapo.fallback = algo.get_or<std::string>("fallback", "exp3-delayed");
    cfg.run.sapo.allow_switch = algo.get_or("allow_switch", true);
    cfg.run.sapo.append_eliminated_pulls = algo.get_or("append_eliminated_pulls", false);
    algo.finish();
  }

  Reader run = top.child("run");
  cfg.run.horizon = run.get<Round>("T");
  cfg.seeds = parse_seeds(run);
  cfg.output_dir = run.get_or<std::string>("output_dir", "out");
  cfg.trace_every = run.get_or<Round>("trace_every", 1);
  if (cfg.trace_every < 1) throw ConfigError("run.trace_every: must be >= 1");
  run.finish();
  top.finish();

  if (cfg.run.num_arms < 1) throw ConfigError("env.K: must be >= 1");
  if (cfg.run.horizon < static_cast<Round>(cfg.run.num_arms) || cfg.run.horizon < 2) {
    throw ConfigError("run.T: must be >= K and >= 2");
  }
  cfg.run.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const auto& c = cfg.run.sapo.constants;
  json j = {
      {"env", {{"K", cfg.run.num_arms}, {"loss", loss_to_json(cfg)}, {"delay", delay_to_json(cfg)}}},
      {"algo",
       {{"policy", to_string(cfg.run.policy)},
        {"variant", to_string(cfg.run.sapo.variant)},
        {"profile", cfg.profile},
        {"fallback", cfg.run.sapo.fallback},
        {"allow_switch", cfg.run.sapo.allow_switch},
        {"append_eliminated_pulls", cfg.run.sapo.append_eliminated_pulls},
        {"constants",
         {{"elim_width_mult", c.elim_width_mult},
          {"delta_mult", c.delta_mult},
          {"n1_numerator", c.n1_numerator},
          {"bsc2_sqrt_coeff", c.bsc2_sqrt_coeff},
          {"bsc2_sigma_coeff", c.bsc2_sigma_coeff},
          {"max_errors_mult", c.max_errors_mult},
          {"ghost_bsc_coeff", c.ghost_bsc_coeff},
          {"log_base", c.log_base},
          {"clip_is_mean", c.clip_is_mean}}}}},
      {"run",
       {{"T", cfg.run.horizon},
        {"seeds", cfg.seeds},
        {"output_dir", cfg.output_dir},
        {"trace_every", cfg.trace_every}}},
  };
  return j.dump(2);
}

}  // namespace desapo
