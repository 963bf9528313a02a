#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pgts/bandit.hpp"
#include "pgts/estimators.hpp"
#include "pgts/trainer.hpp"

namespace pgts {

// Schema violations and unparseable config files. The CLI maps this to
// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingSettings {
  int iterations = 1000;
  int batch_size = 1000;
  double step_size = 0.05;
  MetricKind metric = MetricKind::Mean;
  BaselineKind baseline = BaselineKind::SelfPlay;
  std::uint64_t seed = 1;
  int checkpoint_interval = 0;
};

struct EvalSettings {
  std::int64_t n_instances = 10000;
  std::uint64_t seed = 2;
};

// One experiment: a bandit setting plus how to train and evaluate on it.
// Serialized as a single versioned JSON document; the three built-in
// presets can be overridden field by field.
struct ExperimentConfig {
  int schema_version = 1;
  BanditConfig bandit;
  TrainingSettings training;
  EvalSettings evaluation;
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError
  std::string to_json() const;

  // name in {standard, hetero, many_arms}
  static ExperimentConfig preset(const std::string& name);
  static bool is_preset_name(const std::string& name);

  // Parses a config document; when base is given the document is applied
  // on top of it field by field.
  static ExperimentConfig from_json_text(const std::string& text,
                                         const ExperimentConfig* base = nullptr);
  static ExperimentConfig from_file(const std::string& path,
                                    const ExperimentConfig* base = nullptr);
};

}  // namespace pgts
