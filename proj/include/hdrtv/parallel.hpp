#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hdrtv {

// Execution mode for the row-parallel kernels. Both modes produce
// bit-identical results: work is partitioned by image row, and row partial
// sums are always combined sequentially in row order.
enum class Exec { serial, parallel };

template <class RowFn>
void for_each_row(int rows, Exec exec, RowFn&& fn) {
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int r = 0; r < rows; ++r) fn(r);
}

template <class IndexFn>
void for_each_index(std::size_t count, Exec exec, IndexFn&& fn) {
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long long i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

// `fn(row)` returns the K partial sums of one row; the result is their
// row-ordered sequential total, independent of thread count.
template <std::size_t K, class RowFn>
std::array<double, K> sum_rows(int rows, Exec exec, RowFn&& fn) {
  std::vector<std::array<double, K>> partial(static_cast<std::size_t>(rows));
  for_each_row(rows, exec, [&](int r) { partial[r] = fn(r); });
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

// Number of worker threads the parallel mode will use.
int max_threads();
// Sets the worker count for subsequent parallel kernels (<= 0 keeps default).
void set_max_threads(int n);

}  // namespace hdrtv
