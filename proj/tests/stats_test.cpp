#include <gtest/gtest.h>

#include <vector>

#include "linhash/stats.hpp"

namespace linhash::stats {
namespace {

// Reference values from scipy.stats and statsmodels (Wilson method).

TEST(Wilson, MatchesReference) {
  const Interval a = wilson_interval(3, 10);
  EXPECT_NEAR(a.lo, 0.10779126740630104, 1e-12);
  EXPECT_NEAR(a.hi, 0.6032218525388546, 1e-12);
  const Interval zero = wilson_interval(0, 20);
  EXPECT_NEAR(zero.lo, 0.0, 1e-15);
  EXPECT_NEAR(zero.hi, 0.1611251580528194, 1e-12);
  const Interval all = wilson_interval(20, 20);
  EXPECT_NEAR(all.lo, 0.8388748419471804, 1e-12);
  EXPECT_NEAR(all.hi, 1.0, 1e-12);
}

TEST(ChiSquare, MatchesReference) {
  EXPECT_NEAR(chi_square_critical(3, 0.001), 16.26623619623813, 1e-9);
  EXPECT_NEAR(chi_square_critical(10, 0.05), 18.307038053275146, 1e-9);
  EXPECT_NEAR(chi_square_p_value(10.0, 4), 0.04042768199451279, 1e-12);
  const std::vector<std::uint64_t> flat{25, 25, 25, 25};
  EXPECT_EQ(chi_square_uniform(flat), 0.0);
  const std::vector<std::uint64_t> skew{10, 30};
  EXPECT_NEAR(chi_square_uniform(skew), 10.0, 1e-12);
}

TEST(Moments, MeanErrorQuantileSlope) {
  const std::vector<double> xs{1, 2, 3, 4, 10};
  EXPECT_DOUBLE_EQ(mean(xs), 4.0);
  EXPECT_NEAR(standard_error(xs), 1.5811388300841895, 1e-12);
  const std::vector<double> one{7};
  EXPECT_EQ(standard_error(one), 0.0);
  EXPECT_EQ(quantile_sorted(xs, 0.5), 3.0);
  EXPECT_EQ(quantile_sorted(xs, 1.0), 10.0);
  EXPECT_EQ(quantile_sorted(xs, 0.0), 1.0);
  const std::vector<double> x{10, 12, 14, 16};
  const std::vector<double> y{4, 5, 6, 7};
  EXPECT_NEAR(least_squares_slope(x, y), 0.5, 1e-12);
}

}  // namespace
}  // namespace linhash::stats
