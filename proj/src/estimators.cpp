#include "pgts/estimators.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pgts/kernels.hpp"

namespace pgts {

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Obs: return "obs";
    case MetricKind::Mean: return "mean";
    case MetricKind::Fin: return "fin";
    case MetricKind::Bayes: return "bayes";
  }
  return "?";
}

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Null: return "null";
    case BaselineKind::Oracle: return "oracle";
    case BaselineKind::SelfPlay: return "self";
  }
  return "?";
}

MetricKind metric_from_string(const std::string& name) {
  if (name == "obs") return MetricKind::Obs;
  if (name == "mean") return MetricKind::Mean;
  if (name == "fin") return MetricKind::Fin;
  if (name == "bayes") return MetricKind::Bayes;
  throw std::invalid_argument("unknown reward metric: " + name);
}

BaselineKind baseline_from_string(const std::string& name) {
  if (name == "null") return BaselineKind::Null;
  if (name == "oracle") return BaselineKind::Oracle;
  if (name == "self") return BaselineKind::SelfPlay;
  throw std::invalid_argument("unknown baseline: " + name);
}

bool coupling_allowed(MetricKind metric, BaselineKind baseline) {
  return !(baseline == BaselineKind::Oracle && metric == MetricKind::Bayes);
}

void require_coupled(MetricKind metric, BaselineKind baseline) {
  if (!coupling_allowed(metric, baseline)) {
    throw std::invalid_argument(std::string("estimator pair (") + to_string(metric) +
                                ", " + to_string(baseline) + ") is not coupled");
  }
}

std::vector<EstimatorPair> all_estimator_pairs() {
  std::vector<EstimatorPair> pairs;
  for (MetricKind m : {MetricKind::Obs, MetricKind::Mean, MetricKind::Fin, MetricKind::Bayes}) {
    for (BaselineKind b : {BaselineKind::Null, BaselineKind::Oracle, BaselineKind::SelfPlay}) {
      if (coupling_allowed(m, b)) pairs.push_back({m, b});
    }
  }
  return pairs;
}

void Trajectory::resize(int k, int t) {
  num_arms = k;
  horizon = t;
  action.resize(t);
  reward.resize(t);
  pseudo.resize(static_cast<std::size_t>(t) * k);
  score.resize(static_cast<std::size_t>(t) * 4 * k);
  post_sum.resize(static_cast<std::size_t>(t) * k);
  post_count.resize(static_cast<std::size_t>(t) * k);
  final_sum.assign(k, 0.0);
  final_count.assign(k, 0.0);
  instance = nullptr;
  has_scores = false;
}

void run_episode(const PreparedPolicy& policy, const BanditConfig& config,
                 const Instance& instance, RandomStream policy_stream,
                 Trajectory& out) {
  const int k = config.num_arms;
  const int horizon = config.horizon;
  if (policy.num_arms() != k || policy.horizon() != horizon) {
    throw std::invalid_argument("run_episode: policy and config dimensions disagree");
  }
  out.resize(k, horizon);
  out.instance = &instance;
  out.has_scores = true;

  thread_local std::vector<double> zbuf, mean, var, sigma;
  zbuf.resize(static_cast<std::size_t>(horizon) * k);
  mean.resize(k);
  var.resize(k);
  sigma.resize(k);
  policy_stream.normals(zbuf);
  for (int a = 0; a < k; ++a) sigma[a] = config.noise_sd(a);

  double* sum = out.final_sum.data();
  double* count = out.final_count.data();
  for (int t = 1; t <= horizon; ++t) {
    const std::size_t row = static_cast<std::size_t>(t - 1);
    std::memcpy(out.post_sum.data() + row * k, sum, k * sizeof(double));
    std::memcpy(out.post_count.data() + row * k, count, k * sizeof(double));

    policy.reshape(sum, count, t, mean.data(), var.data());
    double* pseudo = out.pseudo.data() + row * k;
    kernels::shift_scale(k, mean.data(), var.data(), zbuf.data() + row * k, pseudo);
    const int arm = select_action(pseudo, k);
    const double reward = instance.theta[arm] + sigma[arm] * instance.xi(arm, t, horizon);
    out.action[t - 1] = arm;
    out.reward[t - 1] = reward;
    policy.score(pseudo, mean.data(), var.data(), sum, count, t,
                 out.score.data() + row * 4 * k);
    sum[arm] += reward;
    count[arm] += 1.0;
  }
}

void run_constant_episode(int arm, const BanditConfig& config,
                          const Instance& instance, Trajectory& out) {
  const int k = config.num_arms;
  const int horizon = config.horizon;
  if (arm < 0 || arm >= k) throw std::out_of_range("run_constant_episode: bad arm");
  out.resize(k, horizon);
  out.instance = &instance;
  const double sigma = config.noise_sd(arm);
  double* sum = out.final_sum.data();
  double* count = out.final_count.data();
  for (int t = 1; t <= horizon; ++t) {
    const std::size_t row = static_cast<std::size_t>(t - 1);
    std::memcpy(out.post_sum.data() + row * k, sum, k * sizeof(double));
    std::memcpy(out.post_count.data() + row * k, count, k * sizeof(double));
    const double reward = instance.theta[arm] + sigma * instance.xi(arm, t, horizon);
    out.action[t - 1] = arm;
    out.reward[t - 1] = reward;
    sum[arm] += reward;
    count[arm] += 1.0;
  }
}

namespace {

void check_traj(const Trajectory& traj) {
  if (traj.horizon < 1 || traj.instance == nullptr) {
    throw std::invalid_argument("trajectory is incomplete");
  }
}

}  // namespace

void metric_values(MetricKind kind, const Trajectory& traj,
                   const BanditConfig& config, std::vector<double>& out) {
  check_traj(traj);
  const int horizon = traj.horizon;
  const int k = traj.num_arms;
  const Instance& inst = *traj.instance;
  out.resize(horizon);
  switch (kind) {
    case MetricKind::Obs: {
      double acc = 0.0;
      for (int t = horizon; t >= 1; --t) {
        acc += traj.reward[t - 1];
        out[t - 1] = acc;
      }
      break;
    }
    case MetricKind::Mean: {
      double acc = 0.0;
      for (int t = horizon; t >= 1; --t) {
        acc += inst.theta[traj.action[t - 1]];
        out[t - 1] = acc;
      }
      break;
    }
    case MetricKind::Bayes: {
      double acc = 0.0;
      for (int t = horizon; t >= 1; --t) {
        const std::size_t row = static_cast<std::size_t>(t - 1) * k;
        const int arm = traj.action[t - 1];
        acc += posterior_mean_var(traj.post_sum[row + arm], traj.post_count[row + arm],
                                  config.prior_mean[arm], config.prior_var[arm],
                                  config.noise_var[arm])
                   .first;
        out[t - 1] = acc;
      }
      break;
    }
    case MetricKind::Fin: {
      // mu_hat_{I,t}(a): posterior mean of arm a from its realized
      // observations before t plus counterfactual pulls at every s >= t,
      // which reuse the instance's pre-drawn noise.
      thread_local std::vector<double> xi_cum, future_count;
      xi_cum.assign(k, 0.0);
      future_count.assign(k, 0.0);
      for (int t = horizon; t >= 1; --t) {
        const std::size_t row = static_cast<std::size_t>(t - 1) * k;
        const double tail = static_cast<double>(horizon - t + 1);
        future_count[traj.action[t - 1]] += 1.0;
        double total = 0.0;
        for (int a = 0; a < k; ++a) {
          xi_cum[a] += inst.xi(a, t, horizon);
          const double cf_sum = traj.post_sum[row + a] + tail * inst.theta[a] +
                                config.noise_sd(a) * xi_cum[a];
          const double cf_count = traj.post_count[row + a] + tail;
          const double mu_hat =
              posterior_mean_var(cf_sum, cf_count, config.prior_mean[a],
                                 config.prior_var[a], config.noise_var[a])
                  .first;
          total += future_count[a] * mu_hat;
        }
        out[t - 1] = total;
      }
      break;
    }
  }
}

std::vector<double> metric_values(MetricKind kind, const Trajectory& traj,
                                  const BanditConfig& config) {
  std::vector<double> out;
  metric_values(kind, traj, config, out);
  return out;
}

void baseline_values(BaselineKind kind, const Trajectory& traj, MetricKind metric,
                     const Trajectory* self_traj, const BanditConfig& config,
                     std::vector<double>& out) {
  check_traj(traj);
  require_coupled(metric, kind);
  switch (kind) {
    case BaselineKind::Null:
      out.assign(traj.horizon, 0.0);
      break;
    case BaselineKind::Oracle: {
      const int best = select_action(traj.instance->theta.data(), traj.num_arms);
      thread_local Trajectory oracle;
      run_constant_episode(best, config, *traj.instance, oracle);
      metric_values(metric, oracle, config, out);
      break;
    }
    case BaselineKind::SelfPlay: {
      if (self_traj == nullptr) {
        throw std::invalid_argument("self-play baseline requires a self trajectory");
      }
      if (self_traj->instance != traj.instance) {
        throw std::invalid_argument("self-play trajectory must share the instance");
      }
      metric_values(metric, *self_traj, config, out);
      break;
    }
  }
}

std::vector<double> baseline_values(BaselineKind kind, const Trajectory& traj,
                                    MetricKind metric, const Trajectory* self_traj,
                                    const BanditConfig& config) {
  std::vector<double> out;
  baseline_values(kind, traj, metric, self_traj, config, out);
  return out;
}

std::vector<double> estimate_gradient(const Trajectory& traj,
                                      std::span<const double> metric,
                                      std::span<const double> baseline) {
  if (!traj.has_scores) throw std::invalid_argument("trajectory carries no scores");
  const int horizon = traj.horizon;
  const std::size_t dim = static_cast<std::size_t>(4) * traj.num_arms;
  if (metric.size() != static_cast<std::size_t>(horizon) ||
      baseline.size() != static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument("metric/baseline length must equal the horizon");
  }
  std::vector<double> grad(dim, 0.0);
  for (int t = 1; t <= horizon; ++t) {
    const double w = metric[t - 1] - baseline[t - 1];
    if (!std::isfinite(w)) {
      throw std::invalid_argument("estimate_gradient: non-finite metric/baseline");
    }
    const double* s = traj.score_at(t);
    for (std::size_t j = 0; j < dim; ++j) grad[j] += s[j] * w;
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw std::invalid_argument("estimate_gradient: non-finite result");
  }
  return grad;
}

std::vector<double> single_time_estimate(const Trajectory& traj,
                                         std::span<const double> metric,
                                         std::span<const double> baseline, int tau) {
  if (!traj.has_scores) throw std::invalid_argument("trajectory carries no scores");
  if (tau < 1 || tau > traj.horizon) {
    throw std::out_of_range("single_time_estimate: tau out of range");
  }
  const std::size_t dim = static_cast<std::size_t>(4) * traj.num_arms;
  const double w = static_cast<double>(traj.horizon) *
                   (metric[tau - 1] - baseline[tau - 1]);
  if (!std::isfinite(w)) {
    throw std::invalid_argument("single_time_estimate: non-finite metric/baseline");
  }
  std::vector<double> grad(dim);
  const double* s = traj.score_at(tau);
  for (std::size_t j = 0; j < dim; ++j) grad[j] = s[j] * w;
  return grad;
}

EstimatorEvaluator::EstimatorEvaluator(const BanditConfig& config,
                                       std::vector<EstimatorPair> pairs)
    : config_(config), pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw std::invalid_argument("EstimatorEvaluator: no pairs");
  for (const auto& p : pairs_) {
    require_coupled(p.metric, p.baseline);
    needs_self_ = needs_self_ || p.baseline == BaselineKind::SelfPlay;
    needs_oracle_ = needs_oracle_ || p.baseline == BaselineKind::Oracle;
  }
  zeros_.assign(config_.horizon, 0.0);
}

void EstimatorEvaluator::prepare_episode(const PreparedPolicy& policy,
                                         const RandomStream& episode_stream) {
  instance_ = sample_instance(config_, episode_stream);
  run_episode(policy, config_, instance_, episode_stream.child(substream::kPolicyNoise),
              main_);
  if (needs_self_) {
    run_episode(policy, config_, instance_,
                episode_stream.child(substream::kSelfPlayNoise), self_);
  }
  if (needs_oracle_) {
    const int best = select_action(instance_.theta.data(), config_.num_arms);
    run_constant_episode(best, config_, instance_, oracle_);
  }
  for (auto& ready : metric_ready_) ready.fill(false);
}

const std::vector<double>& EstimatorEvaluator::metric_for(MetricKind kind, int which) {
  const int idx = static_cast<int>(kind);
  if (!metric_ready_[which][idx]) {
    const Trajectory& traj = which == 0 ? main_ : which == 1 ? self_ : oracle_;
    metric_values(kind, traj, config_, metrics_[which][idx]);
    metric_ready_[which][idx] = true;
  }
  return metrics_[which][idx];
}

void EstimatorEvaluator::evaluate(const PreparedPolicy& policy,
                                  const RandomStream& episode_stream,
                                  double* gradients, double* regret) {
  prepare_episode(policy, episode_stream);
  const std::size_t dim = static_cast<std::size_t>(this->dim());
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto& pair = pairs_[p];
    const std::vector<double>& m = metric_for(pair.metric, 0);
    const std::vector<double>* b = &zeros_;
    if (pair.baseline == BaselineKind::SelfPlay) b = &metric_for(pair.metric, 1);
    if (pair.baseline == BaselineKind::Oracle) b = &metric_for(pair.metric, 2);
    double* out = gradients + p * dim;
    std::memset(out, 0, dim * sizeof(double));
    for (int t = 1; t <= config_.horizon; ++t) {
      const double w = m[t - 1] - (*b)[t - 1];
      const double* s = main_.score_at(t);
      for (std::size_t j = 0; j < dim; ++j) out[j] += s[j] * w;
    }
  }
  if (regret != nullptr) {
    const double best = instance_.theta[select_action(instance_.theta.data(), config_.num_arms)];
    double r = 0.0;
    for (int t = 0; t < config_.horizon; ++t) r += best - instance_.theta[main_.action[t]];
    *regret = r;
  }
}

void EstimatorEvaluator::evaluate_single_time(const PreparedPolicy& policy,
                                              const RandomStream& episode_stream,
                                              double* gradients, int* tau_out) {
  prepare_episode(policy, episode_stream);
  RandomStream tau_stream = episode_stream.child(substream::kTau);
  int tau = 1 + static_cast<int>(tau_stream.uniform01() * config_.horizon);
  if (tau > config_.horizon) tau = config_.horizon;
  if (tau_out != nullptr) *tau_out = tau;
  const std::size_t dim = static_cast<std::size_t>(this->dim());
  const double* s = main_.score_at(tau);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto& pair = pairs_[p];
    const std::vector<double>& m = metric_for(pair.metric, 0);
    const std::vector<double>* b = &zeros_;
    if (pair.baseline == BaselineKind::SelfPlay) b = &metric_for(pair.metric, 1);
    if (pair.baseline == BaselineKind::Oracle) b = &metric_for(pair.metric, 2);
    const double w = static_cast<double>(config_.horizon) * (m[tau - 1] - (*b)[tau - 1]);
    double* out = gradients + p * dim;
    for (std::size_t j = 0; j < dim; ++j) out[j] = s[j] * w;
  }
}

}  // namespace pgts
