#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace linhash::stats {

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo;
  double hi;
};

// Wilson score interval for `hits` successes in `trials` Bernoulli trials.
// Stays inside [0, 1] and is non-degenerate at 0/n and n/n.
Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = kZ95);

double mean(std::span<const double> xs);
// Sample standard deviation divided by sqrt(n); 0 for n < 2.
double standard_error(std::span<const double> xs);
// Nearest-rank quantile, q in [0, 1]. `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double q);

// Pearson statistic sum (o - e)^2 / e against equal expected counts.
double chi_square_uniform(std::span<const std::uint64_t> observed);
// Upper critical value: P[X >= value] = alpha for X ~ chi^2(dof).
double chi_square_critical(std::size_t dof, double alpha);
// P[X >= statistic].
double chi_square_p_value(double statistic, std::size_t dof);

// Ordinary least-squares slope of ys on xs.
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace linhash::stats
