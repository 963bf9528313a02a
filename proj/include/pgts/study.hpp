#pragma once

#include <cstdint>
#include <vector>

#include "pgts/estimators.hpp"

namespace pgts {

// Empirical covariance traces of CRN-coupled single-time estimators
// T * S_tau (M_tau - B_tau), with percentile-bootstrap confidence
// intervals. All pairs share episodes and the random epoch tau, so the
// gap rows below are paired comparisons.
struct VarianceStudy {
  struct Row {
    EstimatorPair pair;
    double trace = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
  };
  // trace(a) - trace(b) for consecutive metrics (obs -> mean -> fin)
  // under the same baseline.
  struct Gap {
    EstimatorPair a, b;
    double gap = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
  };
  std::vector<Row> rows;
  std::vector<Gap> gaps;
  std::int64_t n_samples = 0;
};

// Stores one gradient sample per (pair, episode): budget roughly
// pairs * n * 32K bytes on a 4K-dimensional problem.
VarianceStudy variance_study(const BanditConfig& config, const MetaParams& params,
                             const std::vector<EstimatorPair>& pairs,
                             std::int64_t n_samples, std::uint64_t seed,
                             int bootstrap_resamples = 200, int threads = 0);

}  // namespace pgts
