#include "pgts/parallel.hpp"

#include <atomic>
#include <cstring>
#include <thread>
#include <vector>

namespace pgts {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
  const int workers = resolve_threads(threads);
  if (n <= 0) return;
  if (workers == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  constexpr std::int64_t kChunk = 16;
  auto body = [&] {
    for (;;) {
      const std::int64_t begin = next.fetch_add(kChunk, std::memory_order_relaxed);
      if (begin >= n) return;
      const std::int64_t end = begin + kChunk < n ? begin + kChunk : n;
      for (std::int64_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double acc = values[0];
    for (std::size_t i = 1; i < n; ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

void pairwise_sum_rows(const double* rows, std::size_t n_rows, std::size_t dim,
                       double* out) {
  if (n_rows == 0) {
    std::memset(out, 0, dim * sizeof(double));
    return;
  }
  std::vector<double> scratch(rows, rows + n_rows * dim);
  std::size_t count = n_rows;
  while (count > 1) {
    const std::size_t pairs = count / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
      double* dst = scratch.data() + i * dim;
      const double* a = scratch.data() + (2 * i) * dim;
      const double* b = scratch.data() + (2 * i + 1) * dim;
      for (std::size_t j = 0; j < dim; ++j) dst[j] = a[j] + b[j];
    }
    if (count & 1) {
      std::memcpy(scratch.data() + pairs * dim, scratch.data() + (count - 1) * dim,
                  dim * sizeof(double));
      count = pairs + 1;
    } else {
      count = pairs;
    }
  }
  std::memcpy(out, scratch.data(), dim * sizeof(double));
}

}  // namespace pgts
