#include "linhash/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace linhash::stats {

Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
  if (hits > trials) throw std::invalid_argument("wilson_interval: hits > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  if (rank == 0) rank = 1;
  return sorted[std::min(rank, sorted.size()) - 1];
}

double chi_square_uniform(std::span<const std::uint64_t> observed) {
  if (observed.empty()) throw std::invalid_argument("chi_square_uniform: no cells");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double expected = total / static_cast<double>(observed.size());
  double stat = 0.0;
  for (std::uint64_t o : observed) {
    const double d = static_cast<double>(o) - expected;
    stat += d * d / expected;
  }
  return stat;
}

double chi_square_critical(std::size_t dof, double alpha) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double chi_square_p_value(double statistic, std::size_t dof) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("least_squares_slope: need two or more paired points");
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace linhash::stats
