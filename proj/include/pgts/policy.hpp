#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pgts/bandit.hpp"

namespace pgts {

// Meta-parameters of the reshaped sampling distribution, stored in
// unconstrained coordinates: lambda_m = eta_m, lambda_v = exp(eta_v),
// lambda_sigma = exp(eta_sigma), lambda_gamma = eta_gamma. Dimension 4K.
//
// Flat layout (used by scores, gradients, and the optimizer):
//   [0,K) eta_m | [K,2K) eta_v | [2K,3K) eta_sigma | [3K,4K) eta_gamma
struct MetaParams {
  std::vector<double> eta_m;
  std::vector<double> eta_v;
  std::vector<double> eta_sigma;
  std::vector<double> eta_gamma;

  MetaParams() = default;
  explicit MetaParams(int num_arms)
      : eta_m(num_arms, 0.0), eta_v(num_arms, 0.0),
        eta_sigma(num_arms, 0.0), eta_gamma(num_arms, 0.0) {}

  int num_arms() const { return static_cast<int>(eta_m.size()); }
  int dim() const { return 4 * num_arms(); }

  std::vector<double> flatten() const;
  static MetaParams from_flat(const std::vector<double>& flat);
  void add_flat(const std::vector<double>& delta);

  std::string to_json() const;                      // checkpoint format
  static MetaParams from_json(const std::string&);  // throws on bad schema
};

// eta values whose induced policy is exactly standard Thompson sampling:
// lambda_m = m_{a,0}, lambda_v = v^2_{a,0}, lambda_sigma = v^2_{a,0} /
// sigma_a^2, lambda_gamma = 0.
MetaParams canonical_meta_params(const BanditConfig& config);

struct SamplingDistribution {
  std::vector<double> mean;
  std::vector<double> var;
};

// Variance decay base d(t). The raw factor 1 - t/T would collapse the
// density at t = T, so the evaluation point is shifted one step:
// d(t) = 1 - (t-1)/T, which is 1 at t = 1 and 1/T at t = T.
using DecayBase = std::function<double(int t, int horizon)>;
double shifted_decay_base(int t, int horizon);

// A MetaParams vector unpacked for the episode inner loop: constrained
// lambda values plus the per-step decay factors lambda_v * d(t)^lambda_gamma
// and log d(t), all precomputed for a fixed horizon.
class PreparedPolicy {
 public:
  PreparedPolicy(const MetaParams& params, int horizon,
                 const DecayBase& decay = shifted_decay_base);

  int num_arms() const { return num_arms_; }
  int horizon() const { return horizon_; }
  const MetaParams& params() const { return params_; }

  const double* lambda_m() const { return lambda_m_.data(); }
  const double* lambda_sigma() const { return lambda_sigma_.data(); }
  double log_decay(int t) const { return log_decay_[t - 1]; }

  // mean/var arrays of length K for decision epoch t (1-based), given the
  // sufficient statistics of the history before t.
  void reshape(const double* sum, const double* count, int t,
               double* mean, double* var) const;

  // Scores at theta (the realized pseudo-action) into the 4K flat layout.
  void score(const double* theta, const double* mean, const double* var,
             const double* sum, const double* count, int t, double* out) const;

 private:
  MetaParams params_;
  int num_arms_;
  int horizon_;
  std::vector<double> lambda_m_;
  std::vector<double> lambda_v_;
  std::vector<double> lambda_sigma_;
  std::vector<double> v_decay_;    // T*K: lambda_v * d(t)^lambda_gamma
  std::vector<double> log_decay_;  // T
};

// Spec-level operations built on PreparedPolicy; the episode runner uses
// the prepared form directly.
SamplingDistribution reshape_distribution(const MetaParams& params,
                                          const PosteriorStats& stats,
                                          int t, int horizon);

// theta_a = mean_a + sqrt(var_a) * z_a. Common-random-number contract:
// different params consuming the same z produce comparable draws.
std::vector<double> sample_pseudo_action(const SamplingDistribution& dist,
                                         const std::vector<double>& z);

// argmax with ties broken toward the lowest index.
int select_action(const std::vector<double>& pseudo_action);
int select_action(const double* values, int n);

std::vector<double> score(const MetaParams& params, const PosteriorStats& stats,
                          int t, int horizon, const std::vector<double>& pseudo_action);

}  // namespace pgts
