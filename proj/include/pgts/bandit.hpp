#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pgts/random.hpp"

namespace pgts {

// Gaussian multi-armed bandit: arm a pays theta_a + sigma_a * xi with
// known noise variance sigma_a^2 and a Normal(prior_mean_a, prior_var_a)
// prior on the unknown mean theta_a.
struct BanditConfig {
  int num_arms = 0;
  int horizon = 0;
  std::vector<double> prior_mean;
  std::vector<double> prior_var;
  std::vector<double> noise_var;

  BanditConfig() = default;
  // Validates on construction: K >= 1, T >= 1, variances strictly
  // positive, all arrays of length K. Throws std::invalid_argument.
  BanditConfig(int num_arms, int horizon, std::vector<double> prior_mean,
               std::vector<double> prior_var, std::vector<double> noise_var);

  // All arms share one prior and one noise variance.
  static BanditConfig uniform(int num_arms, int horizon, double prior_mean,
                              double prior_var, double noise_var);

  void validate() const;
  double noise_sd(int arm) const;
};

// A fully drawn problem instance: the true arm means plus the entire
// K x T panel of standard-normal reward noise. Rewards for any action
// sequence (including counterfactual ones) are deterministic given this.
struct Instance {
  std::vector<double> theta;  // K
  std::vector<double> noise;  // K*T, arm-major: noise[a*T + (t-1)]

  double xi(int arm, int t, int horizon) const {
    return noise[static_cast<std::size_t>(arm) * horizon + (t - 1)];
  }
};

// Per-arm sufficient statistics (S_a, N_a) of the observed history.
struct PosteriorStats {
  std::vector<double> reward_sum;       // S_a
  std::vector<std::int64_t> pull_count;  // N_a

  explicit PosteriorStats(int num_arms = 0)
      : reward_sum(num_arms, 0.0), pull_count(num_arms, 0) {}
  int num_arms() const { return static_cast<int>(reward_sum.size()); }
};

// Draws theta from the prior and the full noise panel. Substreams are
// derived from episode_stream by tag, so repeated calls with the same
// stream return the same instance.
Instance sample_instance(const BanditConfig& config, const RandomStream& episode_stream);

// theta_arm + sigma_arm * xi_{arm,t}; t is 1-based. Throws
// std::out_of_range for a bad arm or time index.
double realize_reward(const Instance& instance, const BanditConfig& config,
                      int arm, int t);

// Returns a copy with (S_arm += reward, N_arm += 1). Throws on a
// non-finite reward.
PosteriorStats update_posterior(const PosteriorStats& stats, int arm, double reward);

// Closed-form conjugate posterior (m_{a,t}, v^2_{a,t}) for one arm.
std::pair<double, double> posterior_mean_var(const PosteriorStats& stats,
                                             const BanditConfig& config, int arm);

// Same closed form on raw (sum, count) values; the hot loops keep the
// sufficient statistics in flat arrays.
std::pair<double, double> posterior_mean_var(double sum, double count,
                                             double prior_mean, double prior_var,
                                             double noise_var);

}  // namespace pgts
