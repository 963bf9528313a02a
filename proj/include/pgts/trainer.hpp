#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pgts/estimators.hpp"

namespace pgts {

// Bias-corrected Adam in ascent form (the trainer maximizes reward).
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;
  double step_size = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState(std::size_t dim, double step_size_)
      : first_moment(dim, 0.0), second_moment(dim, 0.0), step_size(step_size_) {}
};

// Returns the ascent delta to add to the parameters. Throws on non-finite
// gradients without touching the state.
std::vector<double> adam_step(AdamState& state, const std::vector<double>& grad);

struct TrainOptions {
  int iterations = 0;
  int batch_size = 1;
  MetricKind metric = MetricKind::Mean;
  BaselineKind baseline = BaselineKind::SelfPlay;
  double step_size = 0.01;
  std::uint64_t seed = 0;
  int threads = 0;              // 0 = hardware concurrency
  double max_grad_norm = 0.0;   // 0 = no clipping
  int checkpoint_interval = 0;  // 0 = final checkpoint only
};

struct CurvePoint {
  int iteration = 0;       // 1-based
  double batch_regret = 0;
  double grad_norm = 0;
  double wall_ms = 0;
};

struct TrainResult {
  MetaParams params;
  std::vector<CurvePoint> curve;
  std::vector<std::pair<int, MetaParams>> checkpoints;
  std::int64_t episodes_simulated = 0;  // self-play runs count double
};

// Raised when the batch regret blows past 10x the first iteration's.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Batched policy-gradient ascent on the meta-parameters. Starts from the
// canonical (standard-TS) point unless an initial vector is given. Every
// iteration draws a fresh instance batch from substream (seed, iteration);
// the result is bit-identical for a fixed seed regardless of thread count.
// Adam steps are taken in the constrained lambda coordinates with a
// positivity floor on lambda_v and lambda_sigma; see trainer.cpp.
TrainResult train(const BanditConfig& config, const TrainOptions& options,
                  const MetaParams* initial = nullptr);

}  // namespace pgts
