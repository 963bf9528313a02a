#include "pgts/presets.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pgts {

namespace {

using nlohmann::json;

json merge(json base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) return patch;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key())) {
      base[it.key()] = merge(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
  return base;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + " " + what);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

int require_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  return j.get<int>();
}

std::uint64_t require_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) fail(path, "must be an integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) fail(path, "must be >= 0");
  return j.get<std::uint64_t>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

const json& require_field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  if (!j.contains(key)) fail(path + "." + key, "is missing");
  return j.at(key);
}

// A per-arm field is either a K-length array or a scalar broadcast to K.
std::vector<double> per_arm(const json& j, int k, const std::string& path) {
  std::vector<double> out;
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != k) fail(path, "must have length num_arms");
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(require_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.assign(static_cast<std::size_t>(k), require_number(j, path));
  }
  return out;
}

json bandit_to_json(const BanditConfig& b) {
  return json{{"num_arms", b.num_arms},
              {"horizon", b.horizon},
              {"prior_mean", b.prior_mean},
              {"prior_var", b.prior_var},
              {"noise_var", b.noise_var}};
}

BanditConfig bandit_from_json(const json& j) {
  const int k = require_int(require_field(j, "num_arms", "bandit"), "bandit.num_arms");
  const int t = require_int(require_field(j, "horizon", "bandit"), "bandit.horizon");
  if (k < 1) fail("bandit.num_arms", "must be >= 1");
  if (t < 1) fail("bandit.horizon", "must be >= 1");
  try {
    return BanditConfig(
        k, t, per_arm(require_field(j, "prior_mean", "bandit"), k, "bandit.prior_mean"),
        per_arm(require_field(j, "prior_var", "bandit"), k, "bandit.prior_var"),
        per_arm(require_field(j, "noise_var", "bandit"), k, "bandit.noise_var"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig from_json_value(const json& j) {
  ExperimentConfig cfg;
  cfg.schema_version =
      require_int(require_field(j, "schema_version", "config"), "schema_version");
  if (cfg.schema_version != 1) fail("schema_version", "must be 1");
  cfg.bandit = bandit_from_json(require_field(j, "bandit", "config"));

  const json& tr = require_field(j, "training", "config");
  cfg.training.iterations =
      require_int(require_field(tr, "iterations", "training"), "training.iterations");
  cfg.training.batch_size =
      require_int(require_field(tr, "batch_size", "training"), "training.batch_size");
  cfg.training.step_size =
      require_number(require_field(tr, "step_size", "training"), "training.step_size");
  try {
    cfg.training.metric = metric_from_string(
        require_string(require_field(tr, "metric", "training"), "training.metric"));
    cfg.training.baseline = baseline_from_string(
        require_string(require_field(tr, "baseline", "training"), "training.baseline"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: training: ") + e.what());
  }
  cfg.training.seed = require_u64(require_field(tr, "seed", "training"), "training.seed");
  if (tr.contains("checkpoint_interval")) {
    cfg.training.checkpoint_interval =
        require_int(tr.at("checkpoint_interval"), "training.checkpoint_interval");
  }

  const json& ev = require_field(j, "evaluation", "config");
  cfg.evaluation.n_instances = static_cast<std::int64_t>(
      require_int(require_field(ev, "n_instances", "evaluation"), "evaluation.n_instances"));
  cfg.evaluation.seed =
      require_u64(require_field(ev, "seed", "evaluation"), "evaluation.seed");

  if (j.contains("output_dir")) {
    cfg.output_dir = require_string(j.at("output_dir"), "output_dir");
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    bandit.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (training.iterations < 0) throw ConfigError("config: training.iterations must be >= 0");
  if (training.batch_size < 1) throw ConfigError("config: training.batch_size must be >= 1");
  if (!(training.step_size > 0.0)) {
    throw ConfigError("config: training.step_size must be > 0");
  }
  if (training.checkpoint_interval < 0) {
    throw ConfigError("config: training.checkpoint_interval must be >= 0");
  }
  if (!coupling_allowed(training.metric, training.baseline)) {
    throw ConfigError(std::string("config: estimator pair (") + to_string(training.metric) +
                      ", " + to_string(training.baseline) + ") is not coupled");
  }
  if (evaluation.n_instances < 2) {
    throw ConfigError("config: evaluation.n_instances must be >= 2");
  }
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["bandit"] = bandit_to_json(bandit);
  j["training"] = json{{"iterations", training.iterations},
                       {"batch_size", training.batch_size},
                       {"step_size", training.step_size},
                       {"metric", to_string(training.metric)},
                       {"baseline", to_string(training.baseline)},
                       {"seed", training.seed},
                       {"checkpoint_interval", training.checkpoint_interval}};
  j["evaluation"] =
      json{{"n_instances", evaluation.n_instances}, {"seed", evaluation.seed}};
  j["output_dir"] = output_dir;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "standard") {
    cfg.bandit = BanditConfig::uniform(10, 500, 0.0, 1.0, 1.0);
    cfg.training = {1000, 5000, 0.01, MetricKind::Mean, BaselineKind::SelfPlay, 1, 0};
    cfg.evaluation = {20000, 1};
  } else if (name == "hetero") {
    // Noise standard deviations 0.1, 0.4, 1, 4, 10.
    cfg.bandit = BanditConfig(5, 50, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0),
                              {0.01, 0.16, 1.0, 16.0, 100.0});
    cfg.training = {1000, 1000, 0.05, MetricKind::Mean, BaselineKind::SelfPlay, 1, 0};
    cfg.evaluation = {10000, 1};
  } else if (name == "many_arms") {
    cfg.bandit = BanditConfig::uniform(20, 20, 0.0, 1.0, 1.0);
    cfg.training = {1000, 1000, 0.05, MetricKind::Mean, BaselineKind::SelfPlay, 1, 0};
    cfg.evaluation = {10000, 1};
  } else {
    throw ConfigError("config: unknown preset '" + name +
                      "' (expected standard|hetero|many_arms)");
  }
  return cfg;
}

bool ExperimentConfig::is_preset_name(const std::string& name) {
  return name == "standard" || name == "hetero" || name == "many_arms";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const ExperimentConfig* base) {
  json patch;
  try {
    patch = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (base == nullptr) return from_json_value(patch);
  const json merged = merge(json::parse(base->to_json()), patch);
  return from_json_value(merged);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path,
                                             const ExperimentConfig* base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), base);
}

}  // namespace pgts
