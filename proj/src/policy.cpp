#include "pgts/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "pgts/kernels.hpp"

namespace pgts {

std::vector<double> MetaParams::flatten() const {
  const int k = num_arms();
  std::vector<double> flat(static_cast<std::size_t>(4) * k);
  for (int a = 0; a < k; ++a) {
    flat[a] = eta_m[a];
    flat[k + a] = eta_v[a];
    flat[2 * k + a] = eta_sigma[a];
    flat[3 * k + a] = eta_gamma[a];
  }
  return flat;
}

MetaParams MetaParams::from_flat(const std::vector<double>& flat) {
  if (flat.size() % 4 != 0) {
    throw std::invalid_argument("MetaParams: flat vector length must be 4K");
  }
  const int k = static_cast<int>(flat.size() / 4);
  MetaParams p(k);
  for (int a = 0; a < k; ++a) {
    p.eta_m[a] = flat[a];
    p.eta_v[a] = flat[k + a];
    p.eta_sigma[a] = flat[2 * k + a];
    p.eta_gamma[a] = flat[3 * k + a];
  }
  return p;
}

void MetaParams::add_flat(const std::vector<double>& delta) {
  const int k = num_arms();
  if (delta.size() != static_cast<std::size_t>(4) * k) {
    throw std::invalid_argument("MetaParams: delta length must be 4K");
  }
  for (int a = 0; a < k; ++a) {
    eta_m[a] += delta[a];
    eta_v[a] += delta[k + a];
    eta_sigma[a] += delta[2 * k + a];
    eta_gamma[a] += delta[3 * k + a];
  }
}

std::string MetaParams::to_json() const {
  nlohmann::json j;
  j["eta_m"] = eta_m;
  j["eta_v"] = eta_v;
  j["eta_sigma"] = eta_sigma;
  j["eta_gamma"] = eta_gamma;
  return j.dump(2);
}

MetaParams MetaParams::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetaParams p;
  for (const char* key : {"eta_m", "eta_v", "eta_sigma", "eta_gamma"}) {
    if (!j.contains(key) || !j[key].is_array()) {
      throw std::invalid_argument(std::string("MetaParams: missing array field ") + key);
    }
  }
  p.eta_m = j["eta_m"].get<std::vector<double>>();
  p.eta_v = j["eta_v"].get<std::vector<double>>();
  p.eta_sigma = j["eta_sigma"].get<std::vector<double>>();
  p.eta_gamma = j["eta_gamma"].get<std::vector<double>>();
  const std::size_t k = p.eta_m.size();
  if (k == 0 || p.eta_v.size() != k || p.eta_sigma.size() != k || p.eta_gamma.size() != k) {
    throw std::invalid_argument("MetaParams: field arrays must share one nonzero length");
  }
  return p;
}

MetaParams canonical_meta_params(const BanditConfig& config) {
  MetaParams p(config.num_arms);
  for (int a = 0; a < config.num_arms; ++a) {
    p.eta_m[a] = config.prior_mean[a];
    p.eta_v[a] = std::log(config.prior_var[a]);
    p.eta_sigma[a] = std::log(config.prior_var[a] / config.noise_var[a]);
    p.eta_gamma[a] = 0.0;
  }
  return p;
}

double shifted_decay_base(int t, int horizon) {
  return 1.0 - static_cast<double>(t - 1) / horizon;
}

PreparedPolicy::PreparedPolicy(const MetaParams& params, int horizon,
                               const DecayBase& decay)
    : params_(params), num_arms_(params.num_arms()), horizon_(horizon) {
  if (num_arms_ < 1) throw std::invalid_argument("PreparedPolicy: empty MetaParams");
  if (horizon_ < 1) throw std::invalid_argument("PreparedPolicy: horizon must be >= 1");
  const int k = num_arms_;
  lambda_m_ = params.eta_m;
  lambda_v_.resize(k);
  lambda_sigma_.resize(k);
  for (int a = 0; a < k; ++a) {
    lambda_v_[a] = std::exp(params.eta_v[a]);
    lambda_sigma_[a] = std::exp(params.eta_sigma[a]);
  }
  v_decay_.resize(static_cast<std::size_t>(horizon_) * k);
  log_decay_.resize(horizon_);
  for (int t = 1; t <= horizon_; ++t) {
    const double d = decay(t, horizon_);
    if (!(d > 0.0)) {
      throw std::invalid_argument("PreparedPolicy: decay base must stay positive");
    }
    const double logd = std::log(d);
    log_decay_[t - 1] = logd;
    double* row = v_decay_.data() + static_cast<std::size_t>(t - 1) * k;
    for (int a = 0; a < k; ++a) {
      row[a] = lambda_v_[a] * std::exp(params.eta_gamma[a] * logd);
    }
  }
}

void PreparedPolicy::reshape(const double* sum, const double* count, int t,
                             double* mean, double* var) const {
  kernels::reshape_arms(num_arms_, lambda_m_.data(), lambda_sigma_.data(),
                        v_decay_.data() + static_cast<std::size_t>(t - 1) * num_arms_,
                        sum, count, mean, var);
}

void PreparedPolicy::score(const double* theta, const double* mean, const double* var,
                           const double* sum, const double* count, int t,
                           double* out) const {
  const int k = num_arms_;
  kernels::score_arms(k, theta, mean, var, sum, count, lambda_m_.data(),
                      lambda_sigma_.data(), log_decay_[t - 1],
                      out, out + k, out + 2 * k, out + 3 * k);
}

namespace {

void stats_to_arrays(const PosteriorStats& stats, std::vector<double>& sum,
                     std::vector<double>& count) {
  const int k = stats.num_arms();
  sum.assign(stats.reward_sum.begin(), stats.reward_sum.end());
  count.resize(k);
  for (int a = 0; a < k; ++a) count[a] = static_cast<double>(stats.pull_count[a]);
}

}  // namespace

SamplingDistribution reshape_distribution(const MetaParams& params,
                                          const PosteriorStats& stats,
                                          int t, int horizon) {
  if (t < 1 || t > horizon) {
    throw std::out_of_range("reshape_distribution: time index out of range");
  }
  PreparedPolicy prepared(params, horizon);
  std::vector<double> sum, count;
  stats_to_arrays(stats, sum, count);
  SamplingDistribution dist;
  dist.mean.resize(params.num_arms());
  dist.var.resize(params.num_arms());
  prepared.reshape(sum.data(), count.data(), t, dist.mean.data(), dist.var.data());
  return dist;
}

std::vector<double> sample_pseudo_action(const SamplingDistribution& dist,
                                         const std::vector<double>& z) {
  if (z.size() != dist.mean.size()) {
    throw std::invalid_argument("sample_pseudo_action: z length must equal arm count");
  }
  std::vector<double> theta(z.size());
  kernels::shift_scale(z.size(), dist.mean.data(), dist.var.data(), z.data(),
                       theta.data());
  return theta;
}

int select_action(const double* values, int n) {
  int best = 0;
  for (int a = 1; a < n; ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

int select_action(const std::vector<double>& pseudo_action) {
  if (pseudo_action.empty()) {
    throw std::invalid_argument("select_action: empty pseudo-action");
  }
  return select_action(pseudo_action.data(), static_cast<int>(pseudo_action.size()));
}

std::vector<double> score(const MetaParams& params, const PosteriorStats& stats,
                          int t, int horizon, const std::vector<double>& pseudo_action) {
  PreparedPolicy prepared(params, horizon);
  std::vector<double> sum, count;
  stats_to_arrays(stats, sum, count);
  const int k = params.num_arms();
  std::vector<double> mean(k), var(k), out(static_cast<std::size_t>(4) * k);
  prepared.reshape(sum.data(), count.data(), t, mean.data(), var.data());
  prepared.score(pseudo_action.data(), mean.data(), var.data(), sum.data(),
                 count.data(), t, out.data());
  return out;
}

}  // namespace pgts
