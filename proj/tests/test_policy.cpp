#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pgts/policy.hpp"

using namespace pgts;

namespace {

// Log density of the reshaped sampling distribution as a plain function of
// the unconstrained coordinates; the finite-difference oracle for score().
double log_density(const MetaParams& p, const PosteriorStats& stats, int t, int horizon,
                   const std::vector<double>& theta) {
  const int k = p.num_arms();
  const double d = 1.0 - static_cast<double>(t - 1) / horizon;
  double logp = 0.0;
  for (int a = 0; a < k; ++a) {
    const double lm = p.eta_m[a];
    const double lv = std::exp(p.eta_v[a]);
    const double ls = std::exp(p.eta_sigma[a]);
    const double lg = p.eta_gamma[a];
    const double denom = 1.0 + ls * static_cast<double>(stats.pull_count[a]);
    const double mean = (lm + ls * stats.reward_sum[a]) / denom;
    const double var = lv * std::pow(d, lg) / denom;
    const double diff = theta[a] - mean;
    logp += -0.5 * std::log(2.0 * M_PI * var) - diff * diff / (2.0 * var);
  }
  return logp;
}

MetaParams random_params(RandomStream& s, int k) {
  MetaParams p(k);
  for (int a = 0; a < k; ++a) {
    p.eta_m[a] = 2.0 * (s.uniform01() - 0.5);
    p.eta_v[a] = 1.5 * (s.uniform01() - 0.5);
    p.eta_sigma[a] = 1.5 * (s.uniform01() - 0.5);
    p.eta_gamma[a] = 2.0 * (s.uniform01() - 0.5);
  }
  return p;
}

PosteriorStats random_stats(RandomStream& s, int k) {
  PosteriorStats stats(k);
  for (int a = 0; a < k; ++a) {
    stats.pull_count[a] = static_cast<std::int64_t>(s.uniform01() * 8.0);
    stats.reward_sum[a] =
        static_cast<double>(stats.pull_count[a]) * 3.0 * (s.uniform01() - 0.5);
  }
  return stats;
}

}  // namespace

TEST_CASE("canonical parameters for a unit prior are all zero") {
  const auto config = BanditConfig::uniform(3, 10, 0.0, 1.0, 1.0);
  const MetaParams p = canonical_meta_params(config);
  for (int a = 0; a < 3; ++a) {
    CHECK(p.eta_m[a] == 0.0);
    CHECK(p.eta_v[a] == 0.0);
    CHECK(p.eta_sigma[a] == 0.0);
    CHECK(p.eta_gamma[a] == 0.0);
  }
}

TEST_CASE("canonical reshape equals the exact posterior along random histories") {
  RandomStream root(404);
  for (int trial = 0; trial < 200; ++trial) {
    RandomStream s = root.child(trial);
    const int k = 1 + static_cast<int>(s.uniform01() * 5.0);
    const int horizon = 1 + static_cast<int>(s.uniform01() * 19.0);
    std::vector<double> pm(k), pv(k), nv(k);
    for (int a = 0; a < k; ++a) {
      pm[a] = 2.0 * (s.uniform01() - 0.5);
      pv[a] = 0.2 + 2.0 * s.uniform01();
      nv[a] = 0.2 + 4.0 * s.uniform01();
    }
    const BanditConfig config(k, horizon, pm, pv, nv);
    const MetaParams canon = canonical_meta_params(config);
    const Instance inst = sample_instance(config, s.child(1));

    PosteriorStats stats(k);
    for (int t = 1; t <= horizon; ++t) {
      const SamplingDistribution dist = reshape_distribution(canon, stats, t, horizon);
      for (int a = 0; a < k; ++a) {
        const auto [m, v] = posterior_mean_var(stats, config, a);
        CHECK(dist.mean[a] == doctest::Approx(m).epsilon(1e-12));
        CHECK(dist.var[a] == doctest::Approx(v).epsilon(1e-12));
      }
      const int arm = static_cast<int>(s.uniform01() * k);
      stats = update_posterior(stats, arm, realize_reward(inst, config, arm, t));
    }
  }
}

TEST_CASE("reshape formula spot values") {
  MetaParams p(1);  // lambda = (0, 1, 1, 0)
  PosteriorStats stats(1);
  stats.reward_sum[0] = 2.0;
  stats.pull_count[0] = 1;
  const auto dist = reshape_distribution(p, stats, 3, 10);
  CHECK(dist.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dist.var[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("decay factor is inert at t=1 and positive through the horizon") {
  const int horizon = 50;
  MetaParams flat(2);
  MetaParams decayed = flat;
  decayed.eta_gamma = {1.0, -3.0};
  PosteriorStats stats(2);
  const auto d0 = reshape_distribution(flat, stats, 1, horizon);
  const auto d1 = reshape_distribution(decayed, stats, 1, horizon);
  CHECK(d1.var[0] == d0.var[0]);
  CHECK(d1.var[1] == d0.var[1]);
  for (int t = 1; t <= horizon; ++t) {
    const auto dist = reshape_distribution(decayed, stats, t, horizon);
    CHECK(dist.var[0] > 0.0);
    CHECK(dist.var[1] > 0.0);
  }
  // gamma > 0 shrinks late-horizon variance, gamma < 0 inflates it.
  const auto late = reshape_distribution(decayed, stats, horizon, horizon);
  CHECK(late.var[0] < d0.var[0]);
  CHECK(late.var[1] > d0.var[1]);
}

TEST_CASE("pseudo-action sampling is an affine map of z") {
  SamplingDistribution dist;
  dist.mean = {0.3, -1.0};
  dist.var = {4.0, 0.25};
  const auto at_zero = sample_pseudo_action(dist, {0.0, 0.0});
  CHECK(at_zero[0] == 0.3);
  CHECK(at_zero[1] == -1.0);

  SamplingDistribution unit;
  unit.mean = {0.0};
  unit.var = {1.0};
  CHECK(sample_pseudo_action(unit, {1.96})[0] == 1.96);

  RandomStream s(77, 1);
  const int n = 100000;
  std::vector<double> z(n), x(n);
  s.normals(z);
  for (int i = 0; i < n; ++i) x[i] = sample_pseudo_action(dist, {z[i], 0.0})[0];
  CHECK(oracles::sample_var(x) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("argmax action with lowest-index ties") {
  CHECK(select_action({0.1, 0.5, 0.3}) == 1);
  CHECK(select_action({0.5, 0.5}) == 0);
  CHECK(select_action({-2.0}) == 0);
}

TEST_CASE("score vanishes where it should") {
  RandomStream s(11, 0);
  const int k = 3, horizon = 12, t = 4;
  const MetaParams p = random_params(s, k);
  const PosteriorStats stats = random_stats(s, k);
  const auto dist = reshape_distribution(p, stats, t, horizon);

  SUBCASE("at the mean, all eta_m components are zero") {
    const auto sc = score(p, stats, t, horizon, dist.mean);
    for (int a = 0; a < k; ++a) CHECK(sc[a] == 0.0);
  }
  SUBCASE("one standard deviation out, all eta_v components are zero") {
    std::vector<double> theta(k);
    for (int a = 0; a < k; ++a) theta[a] = dist.mean[a] + std::sqrt(dist.var[a]);
    const auto sc = score(p, stats, t, horizon, theta);
    for (int a = 0; a < k; ++a) {
      CHECK(std::fabs(sc[k + a]) < 1e-12);
    }
  }
}

TEST_CASE("analytic score matches central finite differences") {
  RandomStream root(31415);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    RandomStream s = root.child(trial);
    const int k = 1 + static_cast<int>(s.uniform01() * 4.0);
    const int horizon = 2 + static_cast<int>(s.uniform01() * 30.0);
    const int t = 1 + static_cast<int>(s.uniform01() * horizon);
    const MetaParams p = random_params(s, k);
    const PosteriorStats stats = random_stats(s, k);

    const auto dist = reshape_distribution(p, stats, t, horizon);
    std::vector<double> z(k), theta(k);
    s.normals(z);
    theta = sample_pseudo_action(dist, z);

    const auto analytic = score(p, stats, t, horizon, theta);
    const auto flat = p.flatten();
    for (int j = 0; j < 4 * k; ++j) {
      auto up = flat, dn = flat;
      up[j] += h;
      dn[j] -= h;
      const double fd = (log_density(MetaParams::from_flat(up), stats, t, horizon, theta) -
                         log_density(MetaParams::from_flat(dn), stats, t, horizon, theta)) /
                        (2.0 * h);
      const double rel =
          std::fabs(fd - analytic[j]) / std::max(1.0, std::fabs(analytic[j]));
      CHECK(rel < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("score components only see their own arm") {
  RandomStream s(23, 0);
  const int k = 4, horizon = 15, t = 6;
  const MetaParams p = random_params(s, k);
  PosteriorStats stats = random_stats(s, k);
  const auto dist = reshape_distribution(p, stats, t, horizon);
  std::vector<double> z(k);
  s.normals(z);
  const auto theta = sample_pseudo_action(dist, z);
  const auto before = score(p, stats, t, horizon, theta);

  stats.reward_sum[2] += 1.75;  // touch one arm only
  stats.pull_count[2] += 1;
  auto theta2 = theta;
  const auto dist2 = reshape_distribution(p, stats, t, horizon);
  theta2[2] = sample_pseudo_action(dist2, z)[2];
  const auto after = score(p, stats, t, horizon, theta2);
  for (int block = 0; block < 4; ++block) {
    for (int a = 0; a < k; ++a) {
      if (a == 2) continue;
      CHECK(after[block * k + a] == before[block * k + a]);
    }
  }
}

TEST_CASE("score has zero mean over pseudo-action draws") {
  RandomStream s(5, 0);
  const int k = 2, horizon = 10, t = 3;
  const MetaParams p = random_params(s, k);
  const PosteriorStats stats = random_stats(s, k);
  const PreparedPolicy prepared(p, horizon);

  std::vector<double> sum(stats.reward_sum.begin(), stats.reward_sum.end());
  std::vector<double> count(k);
  for (int a = 0; a < k; ++a) count[a] = static_cast<double>(stats.pull_count[a]);

  const int n = 1000000;
  const int dim = 4 * k;
  std::vector<double> mean(k), var(k), z(k), theta(k), sc(dim);
  std::vector<double> acc(dim, 0.0), acc2(dim, 0.0);
  prepared.reshape(sum.data(), count.data(), t, mean.data(), var.data());
  RandomStream zs = s.child(99);
  for (int i = 0; i < n; ++i) {
    zs.normals(z);
    kernels::shift_scale(k, mean.data(), var.data(), z.data(), theta.data());
    prepared.score(theta.data(), mean.data(), var.data(), sum.data(), count.data(), t,
                   sc.data());
    for (int j = 0; j < dim; ++j) {
      acc[j] += sc[j];
      acc2[j] += sc[j] * sc[j];
    }
  }
  for (int j = 0; j < dim; ++j) {
    const double m = acc[j] / n;
    const double sd = std::sqrt((acc2[j] / n - m * m) / n);
    if (sd == 0.0) {
      // eta_sigma of a never-pulled arm: the density does not depend on
      // it, so the score coordinate is identically zero.
      CHECK(m == 0.0);
    } else {
      CHECK(std::fabs(m) < 5.0 * sd);
    }
  }
}

TEST_CASE("argmax is stable under tiny parameter perturbations with fixed z") {
  const auto config = BanditConfig::uniform(5, 20, 0.0, 1.0, 1.0);
  const MetaParams base = canonical_meta_params(config);
  MetaParams bumped = base;
  for (int a = 0; a < 5; ++a) bumped.eta_m[a] += 1e-8;
  for (int a = 0; a < 5; ++a) bumped.eta_v[a] -= 1e-8;

  PosteriorStats stats(5);
  stats.reward_sum = {1.0, -0.5, 0.2, 0.0, 0.7};
  stats.pull_count = {3, 1, 2, 0, 4};

  RandomStream zs(8080, 0);
  std::vector<double> z(5);
  int changed = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    zs.normals(z);
    const auto d0 = reshape_distribution(base, stats, 7, 20);
    const auto d1 = reshape_distribution(bumped, stats, 7, 20);
    const int a0 = select_action(sample_pseudo_action(d0, z));
    const int a1 = select_action(sample_pseudo_action(d1, z));
    changed += a0 != a1 ? 1 : 0;
  }
  CHECK(static_cast<double>(changed) / n < 1e-4);
}

TEST_CASE("meta-parameter JSON checkpoints round-trip exactly") {
  RandomStream s(123, 1);
  MetaParams p = random_params(s, 7);
  const MetaParams q = MetaParams::from_json(p.to_json());
  CHECK(q.eta_m == p.eta_m);
  CHECK(q.eta_v == p.eta_v);
  CHECK(q.eta_sigma == p.eta_sigma);
  CHECK(q.eta_gamma == p.eta_gamma);

  CHECK_THROWS_AS(MetaParams::from_json("{\"eta_m\":[0]}"), std::invalid_argument);
  CHECK_THROWS_AS(MetaParams::from_json("not json"), std::exception);
}
