#pragma once

// Closed-form max-load tail bounds for random linear maps GF(2)^u -> GF(2)^b.
// Every logarithm here is base 2; log2(1) = 0 is accepted wherever b = 1.
// Domain violations throw std::domain_error.

#include <cstddef>

namespace linhash::bounds {

// A bound as computed, plus the same value clamped into [0, 1]. Values >= 1 are
// vacuous but still reported.
struct BoundValue {
  double raw;
  double clamped;
  bool vacuous() const { return raw >= 1.0; }
};

// Coverage constant 4 (2/eps)^(8/eps): a set of size >= c_eps * t * 2^t is
// mapped onto all of GF(2)^t by a uniform linear map with probability >= 1 - eps.
// Requires 0 < eps < 1.
double c_epsilon(double eps);

// Upper bound on P[T(S) != GF(2)^t] for T uniform surjective u -> t, where
// alpha = 1 - |S|/2^u. Requires 1 <= t < u and 0 < alpha < 1.
BoundValue bound_surjective_miss(std::size_t u, std::size_t t, double alpha);

// Upper bound on P[E2] for |S| = 2^b and an intermediate dimension f > b,
// with mu = 2^(b-f): mu^(-log b - log mu + log log 1/mu).
BoundValue bound_e2(std::size_t b, std::size_t f);

// Upper bound on P[lbin >= 2 c_eps r]:
// (1/(1-eps)) * (log r / r)^(-log b - log(log r / r) + log log(r / log r)).
// Requires r >= 4, 0 < eps < 1, b >= 1.
BoundValue bound_tail(std::size_t b, double r, double eps);

// c_eps (f-b) 2^(f-b): smallest bin size for which the E1 -> E2 reduction applies.
double ell_threshold(double eps, std::size_t f, std::size_t b);

// Parameters used to derive bound_tail: f = floor(b + log r - log log r + 1) and
// ell = ceil(2 c_eps r), together with ell_threshold(eps, f, b).
struct TailParameters {
  std::size_t f;
  double ell;
  double threshold;
  bool ell_meets_threshold() const { return ell >= threshold; }
};

// Throws std::logic_error if f <= b or ell < threshold (neither can happen for r >= 4).
TailParameters tail_parameters(std::size_t b, double r, double eps);

}  // namespace linhash::bounds
