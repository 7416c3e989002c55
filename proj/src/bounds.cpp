#include "linhash/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace linhash::bounds {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

void require_eps(double eps) { require(eps > 0.0 && eps < 1.0, "epsilon must lie in (0, 1)"); }

BoundValue make_bound(double raw) { return {raw, std::clamp(raw, 0.0, 1.0)}; }

}  // namespace

double c_epsilon(double eps) {
  require_eps(eps);
  return 4.0 * std::pow(2.0 / eps, 8.0 / eps);
}

BoundValue bound_surjective_miss(std::size_t u, std::size_t t, double alpha) {
  require(t >= 1 && t < u, "bound_surjective_miss requires 1 <= t < u");
  require(alpha > 0.0 && alpha < 1.0, "bound_surjective_miss requires 0 < alpha < 1");
  const double exponent = static_cast<double>(u) - static_cast<double>(t) -
                          std::log2(static_cast<double>(t)) + std::log2(std::log2(1.0 / alpha));
  return make_bound(std::pow(alpha, exponent));
}

BoundValue bound_e2(std::size_t b, std::size_t f) {
  require(b >= 1 && f > b, "bound_e2 requires f > b >= 1");
  const double gap = static_cast<double>(f - b);
  const double mu = std::exp2(-gap);
  // -log b - log mu + log log(1/mu), with log mu = -gap and log(1/mu) = gap.
  const double exponent = -std::log2(static_cast<double>(b)) + gap + std::log2(gap);
  return make_bound(std::pow(mu, exponent));
}

BoundValue bound_tail(std::size_t b, double r, double eps) {
  require(b >= 1, "bound_tail requires b >= 1");
  require(r >= 4.0, "bound_tail requires r >= 4");
  require_eps(eps);
  const double log_r = std::log2(r);
  const double base = log_r / r;
  const double exponent =
      -std::log2(static_cast<double>(b)) - std::log2(base) + std::log2(std::log2(r / log_r));
  return make_bound(std::pow(base, exponent) / (1.0 - eps));
}

double ell_threshold(double eps, std::size_t f, std::size_t b) {
  require(f >= b, "ell_threshold requires f >= b");
  const double gap = static_cast<double>(f - b);
  if (gap == 0.0) {
    require_eps(eps);
    return 0.0;
  }
  return c_epsilon(eps) * gap * std::exp2(gap);
}

TailParameters tail_parameters(std::size_t b, double r, double eps) {
  require(b >= 1, "tail_parameters requires b >= 1");
  require(r >= 4.0, "tail_parameters requires r >= 4");
  require_eps(eps);
  const double log_r = std::log2(r);
  const auto f =
      static_cast<std::size_t>(std::floor(static_cast<double>(b) + log_r - std::log2(log_r) + 1.0));
  TailParameters p{f, std::ceil(2.0 * c_epsilon(eps) * r), 0.0};
  if (p.f <= b) throw std::logic_error("tail_parameters: f <= b");
  p.threshold = ell_threshold(eps, p.f, b);
  if (!p.ell_meets_threshold()) throw std::logic_error("tail_parameters: ell below threshold");
  return p;
}

}  // namespace linhash::bounds
