#pragma once

// Reference implementations used as test oracles. They work on plain integer
// bit patterns and enumerate instead of eliminating, so they share no code
// path with the library beyond the types used to hand values over.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "linhash/gf2.hpp"

namespace oracle {

// A map u -> b as b row masks of u bits each.
using Rows = std::vector<std::uint64_t>;

inline Rows rows_of(const linhash::LinearMap& m) {
  Rows r;
  for (const auto& row : m.rows()) {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < row.dim(); ++i) {
      if (row.get(i)) mask |= std::uint64_t{1} << i;
    }
    r.push_back(mask);
  }
  return r;
}

inline std::uint64_t apply(const Rows& rows, std::uint64_t x) {
  std::uint64_t y = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::popcount(rows[i] & x) & 1) y |= std::uint64_t{1} << i;
  }
  return y;
}

// Bit-by-bit application straight from the matrix entries.
inline std::uint64_t apply_naive(const linhash::LinearMap& m, std::uint64_t x) {
  std::uint64_t y = 0;
  for (std::size_t i = 0; i < m.out_dim(); ++i) {
    int acc = 0;
    for (std::size_t j = 0; j < m.in_dim(); ++j) acc ^= m.bit(i, j) & ((x >> j) & 1);
    if (m.translation() && m.translation()->get(i)) acc ^= 1;
    if (acc) y |= std::uint64_t{1} << i;
  }
  return y;
}

inline std::set<std::uint64_t> image(const Rows& rows, std::size_t in_dim) {
  std::set<std::uint64_t> out;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << in_dim); ++x) out.insert(apply(rows, x));
  return out;
}

inline std::set<std::uint64_t> kernel(const Rows& rows, std::size_t in_dim) {
  std::set<std::uint64_t> out;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << in_dim); ++x) {
    if (apply(rows, x) == 0) out.insert(x);
  }
  return out;
}

inline std::size_t rank(const Rows& rows, std::size_t in_dim) {
  return static_cast<std::size_t>(std::countr_zero(image(rows, in_dim).size()));
}

inline std::set<std::uint64_t> span(const std::vector<std::uint64_t>& gens) {
  std::set<std::uint64_t> out{0};
  for (auto g : gens) {
    std::set<std::uint64_t> next = out;
    for (auto v : out) next.insert(v ^ g);
    out = std::move(next);
  }
  return out;
}

inline std::vector<std::uint64_t> packed(const std::vector<linhash::GF2Vector>& vs) {
  std::vector<std::uint64_t> out;
  for (const auto& v : vs) out.push_back(v.to_uint());
  return out;
}

// Histogram of T over S, by direct application.
inline std::map<std::uint64_t, std::size_t> bins(const Rows& rows, std::uint64_t translation,
                                                 const std::vector<std::uint64_t>& balls) {
  std::map<std::uint64_t, std::size_t> out;
  for (auto s : balls) ++out[apply(rows, s) ^ translation];
  return out;
}

inline std::size_t lbin(const Rows& rows, const std::vector<std::uint64_t>& balls) {
  std::size_t best = 0;
  for (const auto& [label, n] : bins(rows, 0, balls)) best = std::max(best, n);
  return best;
}

// Rows for matrix number `index` of all 2^(in*out) matrices.
inline Rows rows_from_index(std::size_t in_dim, std::size_t out_dim, std::uint64_t index) {
  Rows r(out_dim);
  const std::uint64_t mask = (std::uint64_t{1} << in_dim) - 1;
  for (std::size_t i = 0; i < out_dim; ++i) r[i] = (index >> (i * in_dim)) & mask;
  return r;
}

// Exact E[lbin] over every linear map, as (sum of lbins, number of maps).
inline std::pair<std::uint64_t, std::uint64_t> expected_lbin(std::size_t u, std::size_t b,
                                                             const std::vector<std::uint64_t>& balls) {
  std::uint64_t sum = 0;
  const std::uint64_t maps = std::uint64_t{1} << (u * b);
  for (std::uint64_t i = 0; i < maps; ++i) sum += lbin(rows_from_index(u, b, i), balls);
  return {sum, maps};
}

// Number of T0 : u -> f with t1 o t0 = t, comparing full value tables.
inline std::uint64_t count_factorizations(const Rows& t, const Rows& t1, std::size_t u,
                                          std::size_t f) {
  std::vector<std::uint64_t> target;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << u); ++x) target.push_back(apply(t, x));
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << (u * f)); ++i) {
    const Rows t0 = rows_from_index(u, f, i);
    bool ok = true;
    for (std::uint64_t x = 0; x < target.size() && ok; ++x) ok = apply(t1, apply(t0, x)) == target[x];
    if (ok) ++count;
  }
  return count;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
  while (b) a = std::exchange(b, a % b);
  return a;
}

}  // namespace oracle
