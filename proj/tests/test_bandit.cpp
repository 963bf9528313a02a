#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pgts/bandit.hpp"

using namespace pgts;

TEST_CASE("config validation rejects bad inputs at construction") {
  CHECK_THROWS_AS(BanditConfig::uniform(0, 10, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BanditConfig::uniform(2, 0, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BanditConfig::uniform(2, 10, 0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BanditConfig::uniform(2, 10, 0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BanditConfig(2, 10, {0.0}, {1.0, 1.0}, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_NOTHROW(BanditConfig::uniform(1, 1, -3.0, 2.0, 0.5));
}

TEST_CASE("instances are deterministic given the stream") {
  const auto config = BanditConfig::uniform(4, 6, 0.0, 1.0, 1.0);
  const RandomStream episode(123, 77);
  const Instance a = sample_instance(config, episode);
  const Instance b = sample_instance(config, episode);
  CHECK(a.theta == b.theta);
  CHECK(a.noise == b.noise);
  const Instance c = sample_instance(config, RandomStream(123, 78));
  CHECK(a.theta != c.theta);
}

TEST_CASE("instance marginals match the prior") {
  const auto config = BanditConfig::uniform(2, 1, 0.0, 1.0, 1.0);
  const int n = 100000;
  std::vector<double> theta0(n);
  const RandomStream root(9);
  for (int j = 0; j < n; ++j) {
    theta0[j] = sample_instance(config, root.child(j)).theta[0];
  }
  CHECK(std::fabs(oracles::mean(theta0)) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(oracles::sample_var(theta0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("realize_reward evaluates theta + sigma xi") {
  auto config = BanditConfig::uniform(1, 3, 0.0, 1.0, 1.0);
  Instance inst;
  inst.theta = {1.0};
  inst.noise = {0.0, 1.5, -2.0};
  CHECK(realize_reward(inst, config, 0, 1) == 1.0);

  auto config4 = BanditConfig::uniform(1, 3, 0.0, 1.0, 4.0);
  inst.theta = {0.0};
  CHECK(realize_reward(inst, config4, 0, 2) == 3.0);
  CHECK(realize_reward(inst, config4, 0, 2) == 3.0);

  CHECK_THROWS_AS(realize_reward(inst, config4, 1, 1), std::out_of_range);
  CHECK_THROWS_AS(realize_reward(inst, config4, 0, 0), std::out_of_range);
  CHECK_THROWS_AS(realize_reward(inst, config4, 0, 4), std::out_of_range);
}

TEST_CASE("posterior update closed form") {
  const auto config = BanditConfig::uniform(1, 10, 0.0, 1.0, 1.0);
  PosteriorStats stats(1);

  SUBCASE("no update leaves the prior") {
    const auto [m, v] = posterior_mean_var(stats, config, 0);
    CHECK(m == 0.0);
    CHECK(v == 1.0);
  }

  SUBCASE("one observation") {
    stats = update_posterior(stats, 0, 2.0);
    const auto [m, v] = posterior_mean_var(stats, config, 0);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("two observations, sequential equals batch") {
    stats = update_posterior(stats, 0, 1.0);
    stats = update_posterior(stats, 0, 3.0);
    const auto [m, v] = posterior_mean_var(stats, config, 0);
    CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  }

  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(update_posterior(stats, 0, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(update_posterior(stats, 2, 1.0), std::out_of_range);
  }
}

TEST_CASE("posterior variance shrinks as v0^2/(1+n) when sigma^2 = v0^2") {
  const auto config = BanditConfig::uniform(1, 10, 0.5, 2.0, 2.0);
  PosteriorStats stats(1);
  double prev_var = config.prior_var[0];
  for (int n = 1; n <= 8; ++n) {
    stats = update_posterior(stats, 0, 0.25 * n);
    const auto [m, v] = posterior_mean_var(stats, config, 0);
    (void)m;
    CHECK(v == doctest::Approx(2.0 / (1.0 + n)).epsilon(1e-14));
    CHECK(v < prev_var);
    prev_var = v;
  }
}

TEST_CASE("closed form equals brute-force sequential Bayes on random histories") {
  RandomStream stream(2718);
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    RandomStream s = stream.child(trial);
    const int k = 1 + static_cast<int>(s.uniform01() * 4.0);
    const int len = 1 + static_cast<int>(s.uniform01() * 19.0);
    std::vector<double> pm(k), pv(k), nv(k);
    for (int a = 0; a < k; ++a) {
      pm[a] = 4.0 * (s.uniform01() - 0.5);
      pv[a] = 0.1 + 3.0 * s.uniform01();
      nv[a] = 0.1 + 5.0 * s.uniform01();
    }
    const BanditConfig config(k, len, pm, pv, nv);

    PosteriorStats stats(k);
    std::vector<oracles::SequentialPosterior> oracle;
    for (int a = 0; a < k; ++a) oracle.emplace_back(pm[a], pv[a], nv[a]);

    for (int t = 0; t < len; ++t) {
      const int arm = static_cast<int>(s.uniform01() * k);
      const double reward = 6.0 * (s.uniform01() - 0.5);
      stats = update_posterior(stats, arm, reward);
      oracle[arm].observe(reward);
      for (int a = 0; a < k; ++a) {
        const auto [m, v] = posterior_mean_var(stats, config, a);
        CHECK(m == doctest::Approx(oracle[a].mean()).epsilon(1e-12));
        CHECK(v == doctest::Approx(oracle[a].var()).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("posterior calibration: residual moments match the posterior law") {
  // Fixed round-robin action schedule, so actions are independent of
  // rewards; then E[theta - m_T] = 0 and E[(theta - m_T)^2] = v_T^2.
  const auto config = BanditConfig::uniform(2, 6, 0.3, 1.5, 0.8);
  const int n = 40000;
  std::vector<double> residual(n);
  const RandomStream root(5150);
  double posterior_var = 0.0;
  for (int j = 0; j < n; ++j) {
    const RandomStream episode = root.child(j);
    const Instance inst = sample_instance(config, episode);
    PosteriorStats stats(2);
    for (int t = 1; t <= config.horizon; ++t) {
      const int arm = (t - 1) % 2;
      stats = update_posterior(stats, arm, realize_reward(inst, config, arm, t));
    }
    const auto [m, v] = posterior_mean_var(stats, config, 0);
    residual[j] = inst.theta[0] - m;
    posterior_var = v;
  }
  const double se = std::sqrt(posterior_var / n);
  CHECK(std::fabs(oracles::mean(residual)) < 4.0 * se);
  CHECK(oracles::sample_var(residual) == doctest::Approx(posterior_var).epsilon(0.05));
}

TEST_CASE("pull counts track observed steps") {
  PosteriorStats stats(3);
  stats = update_posterior(stats, 1, 0.5);
  stats = update_posterior(stats, 1, -0.5);
  stats = update_posterior(stats, 2, 1.0);
  CHECK(stats.pull_count[0] + stats.pull_count[1] + stats.pull_count[2] == 3);
  CHECK(stats.reward_sum[1] == 0.0);
}
