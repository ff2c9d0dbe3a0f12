#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "qglab/report.hpp"

using namespace qglab;

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0), "1.00000000000e+00");
  EXPECT_EQ(format_number(-0.000123456789012345), "-1.23456789012e-04");
  EXPECT_EQ(format_number(6.02214076e23), "6.02214076000e+23");
  EXPECT_EQ(format_number(0.0), "0.00000000000e+00");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_number(INFINITY), "inf");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Format, ExactRoundTrips) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::strtod(format_exact(x).c_str(), nullptr), x);
}

TEST(Hash, Fnv1aVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Threads, ResolveOrder) {
  EXPECT_EQ(resolve_thread_count(3), 3u);
  setenv("QGLAB_THREADS", "5", 1);
  EXPECT_EQ(resolve_thread_count(0), 5u);
  EXPECT_EQ(resolve_thread_count(2), 2u);
  unsetenv("QGLAB_THREADS");
  EXPECT_GE(resolve_thread_count(0), 1u);
}

TEST(Threads, ParallelForCoversRange) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Threads, ParallelForRethrows) {
  std::atomic<int> ran{0};
  EXPECT_THROW(parallel_for(10, 3,
                            [&](std::size_t i) {
                              ++ran;
                              if (i == 4) throw std::runtime_error("job 4");
                            }),
               std::runtime_error);
}
