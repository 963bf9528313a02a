#include "pgts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pgts/kernels.hpp"
#include "pgts/parallel.hpp"

namespace pgts {

double episode_regret(const Trajectory& traj, const Instance& instance) {
  const double best = instance.theta[select_action(instance.theta.data(), traj.num_arms)];
  double regret = 0.0;
  for (int t = 0; t < traj.horizon; ++t) {
    regret += best - instance.theta[traj.action[t]];
  }
  return regret;
}

PolicySpec naive_ts_policy() { return {PolicyKind::NaiveTs, {}, "naive_ts"}; }
PolicySpec bayes_ucb_policy() { return {PolicyKind::BayesUcb, {}, "bayes_ucb"}; }
PolicySpec ts_lambda_policy(MetaParams params, std::string label) {
  return {PolicyKind::TsLambda, std::move(params), std::move(label)};
}

void run_naive_ts_episode(const BanditConfig& config, const Instance& instance,
                          RandomStream policy_stream, Trajectory& out) {
  const int k = config.num_arms;
  const int horizon = config.horizon;
  out.resize(k, horizon);
  out.instance = &instance;

  thread_local std::vector<double> zbuf, pseudo;
  zbuf.resize(static_cast<std::size_t>(horizon) * k);
  pseudo.resize(k);
  policy_stream.normals(zbuf);

  double* sum = out.final_sum.data();
  double* count = out.final_count.data();
  for (int t = 1; t <= horizon; ++t) {
    const std::size_t row = static_cast<std::size_t>(t - 1);
    std::memcpy(out.post_sum.data() + row * k, sum, k * sizeof(double));
    std::memcpy(out.post_count.data() + row * k, count, k * sizeof(double));
    const double* z = zbuf.data() + row * k;
    for (int a = 0; a < k; ++a) {
      const auto [m, v] = posterior_mean_var(sum[a], count[a], config.prior_mean[a],
                                             config.prior_var[a], config.noise_var[a]);
      pseudo[a] = std::fma(std::sqrt(v), z[a], m);
    }
    const int arm = select_action(pseudo.data(), k);
    const double reward =
        instance.theta[arm] + config.noise_sd(arm) * instance.xi(arm, t, horizon);
    out.action[t - 1] = arm;
    out.reward[t - 1] = reward;
    std::memcpy(out.pseudo.data() + row * k, pseudo.data(), k * sizeof(double));
    sum[arm] += reward;
    count[arm] += 1.0;
  }
}

int bayes_ucb_action(const PosteriorStats& stats, const BanditConfig& config, int t) {
  if (t < 1) throw std::out_of_range("bayes_ucb_action: t must be >= 1");
  if (t == 1) return 0;  // quantile level 1 - 1/t is 0; fixed lowest-index rule
  const double quantile = kernels::normal_quantile(1.0 - 1.0 / static_cast<double>(t));
  int best = 0;
  double best_index = 0.0;
  for (int a = 0; a < config.num_arms; ++a) {
    const auto [m, v] = posterior_mean_var(stats, config, a);
    const double index = m + quantile * std::sqrt(v);
    if (a == 0 || index > best_index) {
      best = a;
      best_index = index;
    }
  }
  return best;
}

void run_bayes_ucb_episode(const BanditConfig& config, const Instance& instance,
                           Trajectory& out) {
  const int k = config.num_arms;
  const int horizon = config.horizon;
  out.resize(k, horizon);
  out.instance = &instance;

  thread_local std::vector<double> quantiles, index;
  quantiles.resize(horizon + 1);
  index.resize(k);
  for (int t = 2; t <= horizon; ++t) {
    quantiles[t] = kernels::normal_quantile(1.0 - 1.0 / static_cast<double>(t));
  }

  double* sum = out.final_sum.data();
  double* count = out.final_count.data();
  for (int t = 1; t <= horizon; ++t) {
    const std::size_t row = static_cast<std::size_t>(t - 1);
    std::memcpy(out.post_sum.data() + row * k, sum, k * sizeof(double));
    std::memcpy(out.post_count.data() + row * k, count, k * sizeof(double));
    int arm = 0;
    if (t > 1) {
      for (int a = 0; a < k; ++a) {
        const auto [m, v] = posterior_mean_var(sum[a], count[a], config.prior_mean[a],
                                               config.prior_var[a], config.noise_var[a]);
        index[a] = m + quantiles[t] * std::sqrt(v);
      }
      arm = select_action(index.data(), k);
    }
    const double reward =
        instance.theta[arm] + config.noise_sd(arm) * instance.xi(arm, t, horizon);
    out.action[t - 1] = arm;
    out.reward[t - 1] = reward;
    sum[arm] += reward;
    count[arm] += 1.0;
  }
}

namespace {

void run_policy_episode(const PolicySpec& policy, const PreparedPolicy& prepared,
                        const BanditConfig& config, const Instance& instance,
                        const RandomStream& episode, Trajectory& traj) {
  switch (policy.kind) {
    case PolicyKind::TsLambda:
      run_episode(prepared, config, instance, episode.child(substream::kPolicyNoise),
                  traj);
      break;
    case PolicyKind::NaiveTs:
      run_naive_ts_episode(config, instance, episode.child(substream::kPolicyNoise),
                           traj);
      break;
    case PolicyKind::BayesUcb:
      run_bayes_ucb_episode(config, instance, traj);
      break;
  }
}

PreparedPolicy prepare_for(const PolicySpec& policy, const BanditConfig& config) {
  if (policy.kind == PolicyKind::TsLambda) {
    if (policy.params.num_arms() != config.num_arms) {
      throw std::invalid_argument("evaluate_policy: checkpoint arm count mismatch");
    }
    return PreparedPolicy(policy.params, config.horizon);
  }
  return PreparedPolicy(canonical_meta_params(config), config.horizon);
}

struct BatchResult {
  std::vector<double> regret;  // n
  std::vector<double> pulls;   // n*K
};

BatchResult run_eval_batch(const PolicySpec& policy, const BanditConfig& config,
                           std::uint64_t eval_seed, std::int64_t n, int threads) {
  if (n < 1) throw std::invalid_argument("evaluate_policy: need at least one instance");
  const int k = config.num_arms;
  BatchResult result;
  result.regret.resize(n);
  result.pulls.assign(static_cast<std::size_t>(n) * k, 0.0);

  const RandomStream eval_root = RandomStream(eval_seed).child(stream_domain::kEvaluation);
  const PreparedPolicy prepared = prepare_for(policy, config);

  const int workers = resolve_threads(threads);
  const std::int64_t chunk = (n + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::int64_t w) {
    Trajectory traj;
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
    for (std::int64_t j = begin; j < end; ++j) {
      const RandomStream episode = eval_root.child(static_cast<std::uint64_t>(j));
      const Instance instance = sample_instance(config, episode);
      run_policy_episode(policy, prepared, config, instance, episode, traj);
      result.regret[j] = episode_regret(traj, instance);
      double* pulls = result.pulls.data() + static_cast<std::size_t>(j) * k;
      for (int t = 0; t < config.horizon; ++t) pulls[traj.action[t]] += 1.0;
    }
  });
  return result;
}

}  // namespace

EvaluationReport evaluate_policy(const PolicySpec& policy, const BanditConfig& config,
                                 std::uint64_t eval_seed, std::int64_t n_instances,
                                 int threads) {
  if (n_instances < 2) {
    throw std::invalid_argument("evaluate_policy: n_instances must be >= 2");
  }
  const BatchResult batch = run_eval_batch(policy, config, eval_seed, n_instances, threads);

  EvaluationReport report;
  report.policy = policy.label;
  report.n_instances = n_instances;
  report.mean_regret = pairwise_sum(batch.regret) / static_cast<double>(n_instances);
  double ss = 0.0;
  for (double r : batch.regret) {
    const double d = r - report.mean_regret;
    ss += d * d;
  }
  report.std_error = std::sqrt(ss / static_cast<double>(n_instances - 1)) /
                     std::sqrt(static_cast<double>(n_instances));

  const int k = config.num_arms;
  report.mean_pulls_sorted.resize(k);
  pairwise_sum_rows(batch.pulls.data(), static_cast<std::size_t>(n_instances), k,
                    report.mean_pulls_sorted.data());
  for (double& p : report.mean_pulls_sorted) p /= static_cast<double>(n_instances);
  std::sort(report.mean_pulls_sorted.begin(), report.mean_pulls_sorted.end(),
            std::greater<double>());
  return report;
}

std::vector<double> pull_histogram(const PolicySpec& policy, const BanditConfig& config,
                                   std::uint64_t eval_seed, std::int64_t n_instances,
                                   int threads) {
  return evaluate_policy(policy, config, eval_seed, n_instances, threads).mean_pulls_sorted;
}

void replay_eval_episode(const PolicySpec& policy, const BanditConfig& config,
                         std::uint64_t eval_seed, std::int64_t j, Instance& instance,
                         Trajectory& out) {
  const RandomStream episode =
      RandomStream(eval_seed).child(stream_domain::kEvaluation).child(
          static_cast<std::uint64_t>(j));
  instance = sample_instance(config, episode);
  run_policy_episode(policy, prepare_for(policy, config), config, instance, episode, out);
}

}  // namespace pgts
