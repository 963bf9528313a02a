#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "pgts/bandit.hpp"
#include "pgts/policy.hpp"
#include "pgts/random.hpp"

namespace pgts {

// Reward metrics: per-step stand-ins for the remaining-horizon reward sum.
//   Obs   - realized rewards.
//   Mean  - true mean rewards of the chosen arms.
//   Fin   - finite-sample mean estimate: posterior mean of each chosen arm
//           given its realized observations before t plus counterfactual
//           pulls of it at every s = t..T (using the instance's pre-drawn
//           noise panel).
//   Bayes - posterior mean of the chosen arm at selection time.
enum class MetricKind { Obs, Mean, Fin, Bayes };

// Baselines: control variates conditionally independent of the current
// pseudo-action. Oracle and SelfPlay are measured with the same metric
// kind as the estimator they are paired with.
enum class BaselineKind { Null, Oracle, SelfPlay };

const char* to_string(MetricKind kind);
const char* to_string(BaselineKind kind);
MetricKind metric_from_string(const std::string& name);
BaselineKind baseline_from_string(const std::string& name);

struct EstimatorPair {
  MetricKind metric = MetricKind::Mean;
  BaselineKind baseline = BaselineKind::Null;
};

// The oracle baseline needs a metric it can be coupled to; the posterior
// mean metric is not one of them.
bool coupling_allowed(MetricKind metric, BaselineKind baseline);
void require_coupled(MetricKind metric, BaselineKind baseline);

// All metric/baseline combinations that pass the coupling rule.
std::vector<EstimatorPair> all_estimator_pairs();

// One rollout: per step the pseudo-action, chosen arm, realized reward,
// score vector, and the posterior sufficient statistics before the step.
// Buffers are reusable across episodes via resize().
struct Trajectory {
  int num_arms = 0;
  int horizon = 0;
  std::vector<int> action;        // T
  std::vector<double> reward;     // T
  std::vector<double> pseudo;     // T*K
  std::vector<double> score;      // T*4K, flat MetaParams layout per step
  std::vector<double> post_sum;   // T*K: S_{a,t-1}
  std::vector<double> post_count; // T*K: N_{a,t-1}
  std::vector<double> final_sum;  // K: S_{a,T}
  std::vector<double> final_count;// K: N_{a,T}
  const Instance* instance = nullptr;
  bool has_scores = false;

  void resize(int num_arms, int horizon);
  const double* score_at(int t) const {
    return score.data() + static_cast<std::size_t>(t - 1) * 4 * num_arms;
  }
  const double* pseudo_at(int t) const {
    return pseudo.data() + static_cast<std::size_t>(t - 1) * num_arms;
  }
};

// TS(lambda) rollout on a fixed instance. policy_stream supplies the K
// standard-normal draws consumed at each step; the trajectory is a pure
// function of (policy, instance, stream).
void run_episode(const PreparedPolicy& policy, const BanditConfig& config,
                 const Instance& instance, RandomStream policy_stream,
                 Trajectory& out);

// Constant-action rollout (used for oracle baselines). No pseudo-actions
// or scores are produced.
void run_constant_episode(int arm, const BanditConfig& config,
                          const Instance& instance, Trajectory& out);

// M_t for t = 1..T.
void metric_values(MetricKind kind, const Trajectory& traj,
                   const BanditConfig& config, std::vector<double>& out);
std::vector<double> metric_values(MetricKind kind, const Trajectory& traj,
                                  const BanditConfig& config);

// B_t for t = 1..T. SelfPlay requires self_traj (same instance,
// independent policy noise); Oracle replays the constant best-arm policy
// on the trajectory's instance under the coupled metric.
void baseline_values(BaselineKind kind, const Trajectory& traj, MetricKind metric,
                     const Trajectory* self_traj, const BanditConfig& config,
                     std::vector<double>& out);
std::vector<double> baseline_values(BaselineKind kind, const Trajectory& traj,
                                    MetricKind metric, const Trajectory* self_traj,
                                    const BanditConfig& config);

// G = sum_t S_t (M_t - B_t). Throws on non-finite inputs.
std::vector<double> estimate_gradient(const Trajectory& traj,
                                      std::span<const double> metric,
                                      std::span<const double> baseline);

// T * S_tau (M_tau - B_tau); tau is 1-based.
std::vector<double> single_time_estimate(const Trajectory& traj,
                                         std::span<const double> metric,
                                         std::span<const double> baseline, int tau);

// Evaluates a set of estimator pairs on common-random-number coupled
// episodes: one instance, one main trajectory, plus a self-play run and an
// oracle run only if some pair needs them. Owns all scratch, so a worker
// can reuse one evaluator across a whole batch.
class EstimatorEvaluator {
 public:
  EstimatorEvaluator(const BanditConfig& config, std::vector<EstimatorPair> pairs);

  int dim() const { return 4 * config_.num_arms; }
  std::size_t num_pairs() const { return pairs_.size(); }
  const std::vector<EstimatorPair>& pairs() const { return pairs_; }

  // Full-sum estimators. gradients is num_pairs() x dim() row-major;
  // regret (optional) receives the main trajectory's realized regret.
  void evaluate(const PreparedPolicy& policy, const RandomStream& episode_stream,
                double* gradients, double* regret = nullptr);

  // Single-time estimators at a shared uniform tau drawn from the
  // episode's tau substream.
  void evaluate_single_time(const PreparedPolicy& policy,
                            const RandomStream& episode_stream, double* gradients,
                            int* tau_out = nullptr);

  const Trajectory& last_main() const { return main_; }

 private:
  void prepare_episode(const PreparedPolicy& policy, const RandomStream& episode_stream);
  const std::vector<double>& metric_for(MetricKind kind, int which);  // 0 main, 1 self, 2 oracle

  BanditConfig config_;
  std::vector<EstimatorPair> pairs_;
  bool needs_self_ = false;
  bool needs_oracle_ = false;
  Instance instance_;
  Trajectory main_, self_, oracle_;
  std::array<std::vector<double>, 4> metrics_[3];
  std::array<bool, 4> metric_ready_[3];
  std::vector<double> zeros_;
};

}  // namespace pgts
