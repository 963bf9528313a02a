// Command-line front end: experiment presets, training, evaluation,
// estimator variance studies, and pull histograms. Data files only; no
// plotting. Exit codes: 0 success, 2 bad config/flags, 3 training
// divergence.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgts/evaluation.hpp"
#include "pgts/kernels.hpp"
#include "pgts/presets.hpp"
#include "pgts/study.hpp"
#include "pgts/trainer.hpp"

namespace fs = std::filesystem;
using namespace pgts;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct CommonOpts {
  std::string preset;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> n;
  int threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_n = true) {
  cmd->add_option("--preset", opts.preset, "built-in setting: standard|hetero|many_arms");
  cmd->add_option("--config", opts.config_path, "JSON experiment config (overrides preset fields)");
  cmd->add_option("--seed", opts.seed, "seed override");
  if (with_n) cmd->add_option("--n", opts.n, "number of evaluation instances");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out", opts.out_dir, "output directory");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
  std::optional<ExperimentConfig> base;
  if (!opts.preset.empty()) {
    base = ExperimentConfig::preset(opts.preset);
  }
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = ExperimentConfig::from_file(opts.config_path, base ? &*base : nullptr);
  } else if (base) {
    cfg = *base;
  } else {
    throw ConfigError("config: pass --preset and/or --config");
  }
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.n) cfg.evaluation.n_instances = *opts.n;
  cfg.validate();
  return cfg;
}

fs::path ensure_outdir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

std::string sig6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

PolicySpec resolve_policy(const std::string& name) {
  if (name == "naive_ts") return naive_ts_policy();
  if (name == "bayes_ucb") return bayes_ucb_policy();
  if (fs::exists(name)) {
    std::ifstream in(name);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      return ts_lambda_policy(MetaParams::from_json(buf.str()),
                              fs::path(name).stem().string());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: bad checkpoint ") + name + ": " + e.what());
    }
  }
  throw ConfigError("config: unknown policy '" + name +
                    "' (expected naive_ts, bayes_ucb, or a checkpoint path)");
}

std::string report_csv(const std::vector<EvaluationReport>& reports) {
  std::string csv = "policy,mean_regret,std_error,n_instances\n";
  for (const auto& r : reports) {
    csv += r.policy + "," + sig6(r.mean_regret) + "," + sig6(r.std_error) + "," +
           std::to_string(r.n_instances) + "\n";
  }
  return csv;
}

std::string report_json(const std::vector<EvaluationReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"policy", r.policy},
                   {"mean_regret", r.mean_regret},
                   {"std_error", r.std_error},
                   {"n_instances", r.n_instances},
                   {"mean_pulls_sorted", r.mean_pulls_sorted}});
  }
  return arr.dump(2) + "\n";
}

void print_report_table(const std::vector<EvaluationReport>& reports) {
  std::printf("%-24s %12s %12s %10s\n", "policy", "regret", "s.e.", "instances");
  for (const auto& r : reports) {
    std::printf("%-24s %12.3f %12.3f %10lld\n", r.policy.c_str(), r.mean_regret,
                r.std_error, static_cast<long long>(r.n_instances));
  }
}

int cmd_train(const CommonOpts& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  TrainOptions train_opts;
  train_opts.iterations = cfg.training.iterations;
  train_opts.batch_size = cfg.training.batch_size;
  train_opts.metric = cfg.training.metric;
  train_opts.baseline = cfg.training.baseline;
  train_opts.step_size = cfg.training.step_size;
  train_opts.seed = opts.seed.value_or(cfg.training.seed);
  train_opts.threads = opts.threads;
  train_opts.checkpoint_interval = cfg.training.checkpoint_interval;

  const fs::path dir = ensure_outdir(cfg);
  const TrainResult result = train(cfg.bandit, train_opts);

  std::string csv = "iteration,batch_regret,grad_norm,wall_ms\n";
  for (const auto& point : result.curve) {
    csv += std::to_string(point.iteration) + "," + sig6(point.batch_regret) + "," +
           sig6(point.grad_norm) + "," + sig6(point.wall_ms) + "\n";
  }
  write_file(dir / "learning_curve.csv", csv);
  write_file(dir / "checkpoint.json", result.params.to_json() + "\n");
  for (const auto& [iteration, params] : result.checkpoints) {
    char name[32];
    std::snprintf(name, sizeof(name), "checkpoint_%04d.json", iteration);
    write_file(dir / name, params.to_json() + "\n");
  }

  std::printf("trained %d iterations (batch %d, %s/%s), %lld episodes simulated\n",
              train_opts.iterations, train_opts.batch_size,
              to_string(train_opts.metric), to_string(train_opts.baseline),
              static_cast<long long>(result.episodes_simulated));
  if (!result.curve.empty()) {
    std::printf("batch regret: %.3f -> %.3f\n", result.curve.front().batch_regret,
                result.curve.back().batch_regret);
  }
  std::printf("wrote %s and %s\n", (dir / "learning_curve.csv").c_str(),
              (dir / "checkpoint.json").c_str());
  return kExitOk;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& policy_name,
                 const std::string& dump_path, std::int64_t dump_limit) {
  const ExperimentConfig cfg = resolve_config(opts);
  const PolicySpec policy = resolve_policy(policy_name);
  const std::uint64_t seed = opts.seed.value_or(cfg.evaluation.seed);
  const auto report = evaluate_policy(policy, cfg.bandit, seed,
                                      cfg.evaluation.n_instances, opts.threads);
  const fs::path dir = ensure_outdir(cfg);
  write_file(dir / "report.csv", report_csv({report}));
  write_file(dir / "report.json", report_json({report}));

  if (!dump_path.empty()) {
    // Debug dump: one JSON line per episode, replaying the evaluation
    // episodes exactly.
    std::ofstream out(dump_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dump_path);
    const std::int64_t limit = std::min(dump_limit, cfg.evaluation.n_instances);
    Instance instance;
    Trajectory traj;
    for (std::int64_t j = 0; j < limit; ++j) {
      replay_eval_episode(policy, cfg.bandit, seed, j, instance, traj);
      nlohmann::json line{{"episode", j},
                          {"theta", instance.theta},
                          {"action", traj.action},
                          {"reward", traj.reward},
                          {"final_pulls", traj.final_count}};
      if (policy.kind != PolicyKind::BayesUcb) line["pseudo_action"] = traj.pseudo;
      out << line.dump() << "\n";
    }
    std::printf("dumped %lld trajectories to %s\n", static_cast<long long>(limit),
                dump_path.c_str());
  }
  print_report_table({report});
  return kExitOk;
}

int cmd_compare(const CommonOpts& opts, const std::vector<std::string>& checkpoints) {
  const ExperimentConfig cfg = resolve_config(opts);
  const std::uint64_t seed = opts.seed.value_or(cfg.evaluation.seed);
  std::vector<PolicySpec> policies{naive_ts_policy(), bayes_ucb_policy()};
  for (const auto& path : checkpoints) policies.push_back(resolve_policy(path));

  std::vector<EvaluationReport> reports;
  for (const auto& policy : policies) {
    reports.push_back(evaluate_policy(policy, cfg.bandit, seed,
                                      cfg.evaluation.n_instances, opts.threads));
  }
  const fs::path dir = ensure_outdir(cfg);
  write_file(dir / "report.csv", report_csv(reports));
  write_file(dir / "report.json", report_json(reports));
  print_report_table(reports);
  return kExitOk;
}

int cmd_variance_study(const CommonOpts& opts, const std::string& lambda_source,
                       std::int64_t n_samples) {
  const ExperimentConfig cfg = resolve_config(opts);
  MetaParams params;
  if (lambda_source == "canonical") {
    params = canonical_meta_params(cfg.bandit);
  } else {
    const PolicySpec policy = resolve_policy(lambda_source);
    if (policy.kind != PolicyKind::TsLambda) {
      throw ConfigError("config: --lambda must be 'canonical' or a checkpoint path");
    }
    params = policy.params;
  }
  if (n_samples < 10000) throw ConfigError("config: variance study needs --n >= 10000");
  const std::uint64_t seed = opts.seed.value_or(cfg.evaluation.seed);

  const VarianceStudy study = variance_study(cfg.bandit, params, all_estimator_pairs(),
                                             n_samples, seed, 200, opts.threads);
  std::string csv = "metric,baseline,trace,ci_low,ci_high\n";
  for (const auto& row : study.rows) {
    csv += std::string(to_string(row.pair.metric)) + "," + to_string(row.pair.baseline) +
           "," + sig6(row.trace) + "," + sig6(row.ci_low) + "," + sig6(row.ci_high) + "\n";
  }
  const fs::path dir = ensure_outdir(cfg);
  write_file(dir / "variance.csv", csv);

  std::printf("%-8s %-8s %14s %14s %14s\n", "metric", "baseline", "trace", "ci_low",
              "ci_high");
  for (const auto& row : study.rows) {
    std::printf("%-8s %-8s %14.6g %14.6g %14.6g\n", to_string(row.pair.metric),
                to_string(row.pair.baseline), row.trace, row.ci_low, row.ci_high);
  }
  for (const auto& gap : study.gaps) {
    std::printf("gap %s-%s (%s): %.6g  [%.6g, %.6g]\n", to_string(gap.a.metric),
                to_string(gap.b.metric), to_string(gap.a.baseline), gap.gap, gap.ci_low,
                gap.ci_high);
  }
  std::printf("wrote %s\n", (dir / "variance.csv").c_str());
  return kExitOk;
}

int cmd_pull_histogram(const CommonOpts& opts, const std::string& policy_name) {
  const ExperimentConfig cfg = resolve_config(opts);
  const PolicySpec policy = resolve_policy(policy_name);
  const std::uint64_t seed = opts.seed.value_or(cfg.evaluation.seed);
  const auto pulls = pull_histogram(policy, cfg.bandit, seed,
                                    cfg.evaluation.n_instances, opts.threads);
  std::string csv = "arm_rank,mean_pulls\n";
  for (std::size_t i = 0; i < pulls.size(); ++i) {
    csv += std::to_string(i) + "," + sig6(pulls[i]) + "\n";
  }
  const fs::path dir = ensure_outdir(cfg);
  write_file(dir / "pulls.csv", csv);
  for (std::size_t i = 0; i < pulls.size(); ++i) {
    std::printf("arm_rank %2zu: %.4f\n", i, pulls[i]);
  }
  std::printf("wrote %s\n", (dir / "pulls.csv").c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-gradient training and benchmarking of reshaped Thompson sampling"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts, compare_opts, var_opts, pull_opts;
  std::string eval_policy = "naive_ts", pull_policy = "naive_ts";
  std::string dump_path;
  std::int64_t dump_limit = 100;
  std::string lambda_source = "canonical";
  std::int64_t var_n = 20000;
  std::vector<std::string> compare_checkpoints;

  CLI::App* train_cmd = app.add_subcommand("train", "policy-gradient training run");
  add_common(train_cmd, train_opts, false);

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "regret of one policy");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--policy", eval_policy,
                       "naive_ts | bayes_ucb | checkpoint path");
  eval_cmd->add_option("--dump-trajectories", dump_path,
                       "debug: write per-episode JSON lines here");
  eval_cmd->add_option("--dump-limit", dump_limit, "episodes to dump (default 100)");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "all policies on one shared evaluation batch");
  add_common(compare_cmd, compare_opts);
  compare_cmd->add_option("--checkpoint", compare_checkpoints,
                          "trained checkpoint(s) to include");

  CLI::App* var_cmd = app.add_subcommand(
      "variance-study", "covariance traces of single-time gradient estimators");
  add_common(var_cmd, var_opts, false);
  var_cmd->add_option("--lambda", lambda_source, "canonical | checkpoint path");
  var_cmd->add_option("--n", var_n, "number of CRN-coupled samples");

  CLI::App* pull_cmd =
      app.add_subcommand("pull-histogram", "mean pulls per arm, sorted");
  add_common(pull_cmd, pull_opts);
  pull_cmd->add_option("--policy", pull_policy,
                       "naive_ts | bayes_ucb | checkpoint path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_opts);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_opts, eval_policy, dump_path, dump_limit);
    if (compare_cmd->parsed()) return cmd_compare(compare_opts, compare_checkpoints);
    if (var_cmd->parsed()) return cmd_variance_study(var_opts, lambda_source, var_n);
    if (pull_cmd->parsed()) return cmd_pull_histogram(pull_opts, pull_policy);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
