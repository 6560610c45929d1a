#include <gtest/gtest.h>

#include <cmath>

#include "hdrtv/parallel.hpp"

using namespace hdrtv;

TEST(Parallel, RowSumsIndependentOfThreadCount) {
  auto row = [](int r) {
    std::array<double, 2> s{};
    for (int i = 0; i < 1000; ++i) {
      const double v = std::sin(r * 1000.0 + i) * 1e-3 + 1.0 / (r + i + 1);
      s[0] += v;
      s[1] += v * v;
    }
    return s;
  };
  const auto serial = sum_rows<2>(517, Exec::serial, row);
  const int saved = max_threads();
  for (int t : {1, 2, 3, 8}) {
    set_max_threads(t);
    EXPECT_EQ(sum_rows<2>(517, Exec::parallel, row), serial) << t;
  }
  set_max_threads(saved);
}

TEST(Parallel, EveryIndexVisitedOnce) {
  std::vector<int> hits(10007, 0);
  for_each_index(hits.size(), Exec::parallel, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  std::vector<int> rows(33, 0);
  for_each_row(33, Exec::parallel, [&](int r) { rows[r] += r; });
  for (int r = 0; r < 33; ++r) EXPECT_EQ(rows[r], r);
}
