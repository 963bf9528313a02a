#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgts/estimators.hpp"

namespace pgts {

struct EvaluationReport {
  std::string policy;
  double mean_regret = 0.0;
  double std_error = 0.0;
  std::int64_t n_instances = 0;
  std::vector<double> mean_pulls_sorted;  // per arm, descending
};

// Realized regret of one episode: sum_t (max_a theta_a - theta_{A_t}).
// Depends only on the true means and the action sequence.
double episode_regret(const Trajectory& traj, const Instance& instance);

enum class PolicyKind { TsLambda, NaiveTs, BayesUcb };

struct PolicySpec {
  PolicyKind kind = PolicyKind::NaiveTs;
  MetaParams params;  // TsLambda only
  std::string label;
};

PolicySpec naive_ts_policy();
PolicySpec bayes_ucb_policy();
PolicySpec ts_lambda_policy(MetaParams params, std::string label = "ts_lambda");

// Standard Thompson sampling through the exact-posterior route: an
// independent implementation of the policy that TS(lambda) reproduces at
// the canonical point.
void run_naive_ts_episode(const BanditConfig& config, const Instance& instance,
                          RandomStream policy_stream, Trajectory& out);

// Bayes-UCB with quantile level 1 - 1/t. The level is 0 at t = 1, where
// the policy deterministically pulls arm 0.
void run_bayes_ucb_episode(const BanditConfig& config, const Instance& instance,
                           Trajectory& out);
int bayes_ucb_action(const PosteriorStats& stats, const BanditConfig& config, int t);

// Runs the policy on n_instances instances drawn from eval_seed. All
// policies evaluated under one eval_seed see bit-identical instances and
// (where applicable) bit-identical policy noise.
EvaluationReport evaluate_policy(const PolicySpec& policy, const BanditConfig& config,
                                 std::uint64_t eval_seed, std::int64_t n_instances,
                                 int threads = 0);

// Mean pulls per arm over the evaluation batch, sorted descending.
std::vector<double> pull_histogram(const PolicySpec& policy, const BanditConfig& config,
                                   std::uint64_t eval_seed, std::int64_t n_instances,
                                   int threads = 0);

// Re-runs exactly the episode that evaluate_policy(policy, config,
// eval_seed, ...) executes for instance index j. Backs the trajectory
// debug dump; episodes are never persisted otherwise.
void replay_eval_episode(const PolicySpec& policy, const BanditConfig& config,
                         std::uint64_t eval_seed, std::int64_t j, Instance& instance,
                         Trajectory& out);

}  // namespace pgts
