#include "pgts/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "pgts/parallel.hpp"

namespace pgts {

std::vector<double> adam_step(AdamState& state, const std::vector<double>& grad) {
  const std::size_t dim = state.first_moment.size();
  if (grad.size() != dim) throw std::invalid_argument("adam_step: dimension mismatch");
  for (double g : grad) {
    if (!std::isfinite(g)) throw std::invalid_argument("adam_step: non-finite gradient");
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  std::vector<double> delta(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double g = grad[j];
    state.first_moment[j] = state.beta1 * state.first_moment[j] + (1.0 - state.beta1) * g;
    state.second_moment[j] =
        state.beta2 * state.second_moment[j] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.first_moment[j] / bc1;
    const double v_hat = state.second_moment[j] / bc2;
    delta[j] = state.step_size * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  return delta;
}

namespace {

constexpr double kLambdaFloor = 1e-6;

// The optimizer steps in the constrained coordinates (lambda_m, lambda_v,
// lambda_sigma, lambda_gamma) rather than the unconstrained eta vector:
// near-zero variances make log-coordinate steps multiplicative, which lets
// long runs collapse the sampling variance and blow up the score scale.
// Absolute lambda steps with a positivity floor hold the optimum steadily.
std::vector<double> lambda_coords(const MetaParams& params) {
  const int k = params.num_arms();
  std::vector<double> lambda(static_cast<std::size_t>(4) * k);
  for (int a = 0; a < k; ++a) {
    lambda[a] = params.eta_m[a];
    lambda[k + a] = std::exp(params.eta_v[a]);
    lambda[2 * k + a] = std::exp(params.eta_sigma[a]);
    lambda[3 * k + a] = params.eta_gamma[a];
  }
  return lambda;
}

MetaParams params_from_lambda(const std::vector<double>& lambda) {
  const int k = static_cast<int>(lambda.size() / 4);
  MetaParams params(k);
  for (int a = 0; a < k; ++a) {
    params.eta_m[a] = lambda[a];
    params.eta_v[a] = std::log(lambda[k + a]);
    params.eta_sigma[a] = std::log(lambda[2 * k + a]);
    params.eta_gamma[a] = lambda[3 * k + a];
  }
  return params;
}

}  // namespace

TrainResult train(const BanditConfig& config, const TrainOptions& options,
                  const MetaParams* initial) {
  config.validate();
  require_coupled(options.metric, options.baseline);
  if (options.iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
  if (options.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

  TrainResult result;
  result.params = initial != nullptr ? *initial : canonical_meta_params(config);
  if (result.params.num_arms() != config.num_arms) {
    throw std::invalid_argument("train: MetaParams arm count mismatch");
  }
  if (options.iterations == 0) return result;

  const int k = config.num_arms;
  const int dim = 4 * k;
  const int batch = options.batch_size;
  const int threads = resolve_threads(options.threads);
  const std::vector<EstimatorPair> pair{{options.metric, options.baseline}};
  const std::int64_t episodes_per_instance =
      options.baseline == BaselineKind::SelfPlay ? 2 : 1;

  AdamState adam(static_cast<std::size_t>(dim), options.step_size);
  RandomStream train_root = RandomStream(options.seed).child(stream_domain::kTraining);

  std::vector<double> lambda = lambda_coords(result.params);
  std::vector<double> grad_slots(static_cast<std::size_t>(batch) * dim);
  std::vector<double> regret_slots(batch);
  std::vector<double> mean_grad(dim);
  double first_regret = 0.0;

  for (int iter = 1; iter <= options.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const PreparedPolicy prepared(result.params, config.horizon);
    const RandomStream iter_stream = train_root.child(static_cast<std::uint64_t>(iter));

    const int chunk = (batch + threads - 1) / threads;
    parallel_for(threads, threads, [&](std::int64_t w) {
      EstimatorEvaluator evaluator(config, pair);
      const std::int64_t begin = w * chunk;
      const std::int64_t end = std::min<std::int64_t>(begin + chunk, batch);
      for (std::int64_t j = begin; j < end; ++j) {
        evaluator.evaluate(prepared, iter_stream.child(static_cast<std::uint64_t>(j)),
                           grad_slots.data() + j * dim, &regret_slots[j]);
      }
    });

    pairwise_sum_rows(grad_slots.data(), batch, dim, mean_grad.data());
    for (double& g : mean_grad) g /= batch;
    const double batch_regret = pairwise_sum(regret_slots) / batch;
    result.episodes_simulated += static_cast<std::int64_t>(batch) * episodes_per_instance;

    if (iter == 1) {
      first_regret = batch_regret;
    } else if (batch_regret > 10.0 * first_regret) {
      throw DivergenceError("training diverged at iteration " + std::to_string(iter) +
                            ": batch regret " + std::to_string(batch_regret) +
                            " exceeds 10x iteration-1 regret " +
                            std::to_string(first_regret));
    }

    // Scores are gradients in eta coordinates; chain rule onto lambda
    // (d eta_v / d lambda_v = 1 / lambda_v, same for sigma).
    for (int a = 0; a < k; ++a) {
      mean_grad[k + a] /= lambda[k + a];
      mean_grad[2 * k + a] /= lambda[2 * k + a];
    }
    for (double g : mean_grad) {
      if (!std::isfinite(g)) {
        throw DivergenceError("training diverged at iteration " + std::to_string(iter) +
                              ": non-finite batch gradient");
      }
    }

    double grad_norm = 0.0;
    for (double g : mean_grad) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);
    if (options.max_grad_norm > 0.0 && grad_norm > options.max_grad_norm) {
      const double scale = options.max_grad_norm / grad_norm;
      for (double& g : mean_grad) g *= scale;
    }

    const std::vector<double> delta = adam_step(adam, mean_grad);
    for (int j = 0; j < dim; ++j) lambda[j] += delta[j];
    for (int a = 0; a < k; ++a) {
      lambda[k + a] = std::max(lambda[k + a], kLambdaFloor);
      lambda[2 * k + a] = std::max(lambda[2 * k + a], kLambdaFloor);
    }
    result.params = params_from_lambda(lambda);

    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
    result.curve.push_back({iter, batch_regret, grad_norm, wall_ms});
    if (options.checkpoint_interval > 0 && iter % options.checkpoint_interval == 0) {
      result.checkpoints.emplace_back(iter, result.params);
    }
  }
  return result;
}

}  // namespace pgts
