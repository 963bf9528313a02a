#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace pgts {

// Runs fn(i) for i in [0, n). threads <= 0 means hardware concurrency.
// Work items must be independent; results that need combining should be
// written to per-index slots and reduced with the pairwise helpers below
// so that totals do not depend on the thread count.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

int resolve_threads(int threads);

// Pairwise (balanced-tree) reductions. Deterministic for a given slot
// order regardless of how many workers filled the slots.
double pairwise_sum(std::span<const double> values);

// Sums n_rows rows of width dim into out. Destroys the scratch copy it
// makes internally, not the input.
void pairwise_sum_rows(const double* rows, std::size_t n_rows, std::size_t dim,
                       double* out);

}  // namespace pgts
