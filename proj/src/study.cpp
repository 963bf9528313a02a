#include "pgts/study.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pgts/parallel.hpp"

namespace pgts {

namespace {

// Trace of the sample covariance over the selected rows (with
// repetition). Rows live at samples[idx[i]*stride + offset .. +dim).
double trace_of(const double* samples, std::size_t stride, std::size_t offset,
                const std::vector<std::int64_t>& idx, int dim,
                std::vector<double>& s1, std::vector<double>& s2) {
  const std::int64_t n = static_cast<std::int64_t>(idx.size());
  s1.assign(dim, 0.0);
  s2.assign(dim, 0.0);
  for (std::int64_t i : idx) {
    const double* row = samples + static_cast<std::size_t>(i) * stride + offset;
    for (int j = 0; j < dim; ++j) {
      s1[j] += row[j];
      s2[j] += row[j] * row[j];
    }
  }
  double trace = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double mean = s1[j] / n;
    trace += (s2[j] - n * mean * mean) / (n - 1);
  }
  return trace;
}

}  // namespace

VarianceStudy variance_study(const BanditConfig& config, const MetaParams& params,
                             const std::vector<EstimatorPair>& pairs,
                             std::int64_t n_samples, std::uint64_t seed,
                             int bootstrap_resamples, int threads) {
  if (n_samples < 100) throw std::invalid_argument("variance_study: too few samples");
  const PreparedPolicy prepared(params, config.horizon);
  const int dim = 4 * config.num_arms;
  const std::size_t stride = pairs.size() * static_cast<std::size_t>(dim);
  std::vector<double> samples(static_cast<std::size_t>(n_samples) * stride);

  const RandomStream root = RandomStream(seed).child(stream_domain::kVarianceStudy);
  const int workers = resolve_threads(threads);
  const std::int64_t chunk = (n_samples + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::int64_t w) {
    EstimatorEvaluator evaluator(config, pairs);
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min<std::int64_t>(begin + chunk, n_samples);
    for (std::int64_t i = begin; i < end; ++i) {
      evaluator.evaluate_single_time(prepared, root.child(static_cast<std::uint64_t>(i)),
                                     samples.data() + i * stride);
    }
  });

  VarianceStudy study;
  study.n_samples = n_samples;
  std::vector<std::int64_t> all(n_samples);
  for (std::int64_t i = 0; i < n_samples; ++i) all[i] = i;

  std::vector<double> point(pairs.size());
  {
    std::vector<double> s1, s2;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      point[p] = trace_of(samples.data(), stride, p * dim, all, dim, s1, s2);
    }
  }

  // Paired percentile bootstrap: one index set per resample, shared by
  // all pairs.
  const int n_boot = bootstrap_resamples;
  std::vector<std::vector<double>> boot(pairs.size(), std::vector<double>(n_boot));
  const RandomStream boot_root = root.child(0xB007);
  parallel_for(n_boot, threads, [&](std::int64_t b) {
    RandomStream s = boot_root.child(static_cast<std::uint64_t>(b));
    std::vector<std::int64_t> idx(n_samples);
    for (std::int64_t i = 0; i < n_samples; ++i) {
      idx[i] = static_cast<std::int64_t>(s.uniform01() * n_samples);
      if (idx[i] >= n_samples) idx[i] = n_samples - 1;
    }
    std::vector<double> s1, s2;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      boot[p][b] = trace_of(samples.data(), stride, p * dim, idx, dim, s1, s2);
    }
  });

  const auto percentile = [&](std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double pos = q * (xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo]);
  };

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    study.rows.push_back({pairs[p], point[p], percentile(boot[p], 0.025),
                          percentile(boot[p], 0.975)});
  }

  const auto find_pair = [&](MetricKind m, BaselineKind b) -> int {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p].metric == m && pairs[p].baseline == b) return static_cast<int>(p);
    }
    return -1;
  };
  const MetricKind chain[3] = {MetricKind::Obs, MetricKind::Mean, MetricKind::Fin};
  for (BaselineKind b :
       {BaselineKind::Null, BaselineKind::Oracle, BaselineKind::SelfPlay}) {
    for (int c = 0; c + 1 < 3; ++c) {
      const int pa = find_pair(chain[c], b);
      const int pb = find_pair(chain[c + 1], b);
      if (pa < 0 || pb < 0) continue;
      std::vector<double> diffs(n_boot);
      for (int i = 0; i < n_boot; ++i) diffs[i] = boot[pa][i] - boot[pb][i];
      study.gaps.push_back({pairs[pa], pairs[pb], point[pa] - point[pb],
                            percentile(diffs, 0.025), percentile(diffs, 0.975)});
    }
  }
  return study;
}

}  // namespace pgts
