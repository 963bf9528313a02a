#include "pgts/bandit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pgts {

BanditConfig::BanditConfig(int num_arms_, int horizon_, std::vector<double> prior_mean_,
                           std::vector<double> prior_var_, std::vector<double> noise_var_)
    : num_arms(num_arms_),
      horizon(horizon_),
      prior_mean(std::move(prior_mean_)),
      prior_var(std::move(prior_var_)),
      noise_var(std::move(noise_var_)) {
  validate();
}

BanditConfig BanditConfig::uniform(int num_arms, int horizon, double prior_mean,
                                   double prior_var, double noise_var) {
  const std::size_t k = static_cast<std::size_t>(num_arms > 0 ? num_arms : 0);
  return BanditConfig(num_arms, horizon, std::vector<double>(k, prior_mean),
                      std::vector<double>(k, prior_var), std::vector<double>(k, noise_var));
}

void BanditConfig::validate() const {
  if (num_arms < 1) throw std::invalid_argument("bandit: num_arms must be >= 1");
  if (horizon < 1) throw std::invalid_argument("bandit: horizon must be >= 1");
  const std::size_t k = static_cast<std::size_t>(num_arms);
  if (prior_mean.size() != k || prior_var.size() != k || noise_var.size() != k) {
    throw std::invalid_argument("bandit: per-arm arrays must have length num_arms");
  }
  for (int a = 0; a < num_arms; ++a) {
    if (!std::isfinite(prior_mean[a])) {
      throw std::invalid_argument("bandit: prior_mean[" + std::to_string(a) + "] not finite");
    }
    if (!(prior_var[a] > 0.0) || !std::isfinite(prior_var[a])) {
      throw std::invalid_argument("bandit: prior_var[" + std::to_string(a) + "] must be > 0");
    }
    if (!(noise_var[a] > 0.0) || !std::isfinite(noise_var[a])) {
      throw std::invalid_argument("bandit: noise_var[" + std::to_string(a) + "] must be > 0");
    }
  }
}

double BanditConfig::noise_sd(int arm) const { return std::sqrt(noise_var[arm]); }

Instance sample_instance(const BanditConfig& config, const RandomStream& episode_stream) {
  const int k = config.num_arms;
  const int t = config.horizon;
  Instance inst;
  inst.theta.resize(k);
  inst.noise.resize(static_cast<std::size_t>(k) * t);

  RandomStream theta_stream = episode_stream.child(substream::kInstanceTheta);
  theta_stream.normals(inst.theta);
  for (int a = 0; a < k; ++a) {
    inst.theta[a] = config.prior_mean[a] + std::sqrt(config.prior_var[a]) * inst.theta[a];
  }

  RandomStream noise_stream = episode_stream.child(substream::kRewardNoise);
  noise_stream.normals(inst.noise);
  return inst;
}

double realize_reward(const Instance& instance, const BanditConfig& config,
                      int arm, int t) {
  if (arm < 0 || arm >= config.num_arms) {
    throw std::out_of_range("realize_reward: arm out of range");
  }
  if (t < 1 || t > config.horizon) {
    throw std::out_of_range("realize_reward: time index out of range");
  }
  return instance.theta[arm] + config.noise_sd(arm) * instance.xi(arm, t, config.horizon);
}

PosteriorStats update_posterior(const PosteriorStats& stats, int arm, double reward) {
  if (arm < 0 || arm >= stats.num_arms()) {
    throw std::out_of_range("update_posterior: arm out of range");
  }
  if (!std::isfinite(reward)) {
    throw std::invalid_argument("update_posterior: reward not finite");
  }
  PosteriorStats next = stats;
  next.reward_sum[arm] += reward;
  next.pull_count[arm] += 1;
  return next;
}

std::pair<double, double> posterior_mean_var(double sum, double count,
                                             double prior_mean, double prior_var,
                                             double noise_var) {
  const double precision = 1.0 / prior_var + count / noise_var;
  const double var = 1.0 / precision;
  const double mean = var * (prior_mean / prior_var + sum / noise_var);
  return {mean, var};
}

std::pair<double, double> posterior_mean_var(const PosteriorStats& stats,
                                             const BanditConfig& config, int arm) {
  if (arm < 0 || arm >= config.num_arms) {
    throw std::out_of_range("posterior_mean_var: arm out of range");
  }
  return posterior_mean_var(stats.reward_sum[arm],
                            static_cast<double>(stats.pull_count[arm]),
                            config.prior_mean[arm], config.prior_var[arm],
                            config.noise_var[arm]);
}

}  // namespace pgts
