#pragma once

// Bit-packed linear algebra over GF(2).
//
// Component i of a GF2Vector is bit (i % 64) of word (i / 64). Bits past the
// last component are always zero, so equality and ordering are plain word
// comparisons. Ordering is numeric: the vector is read as an unsigned integer
// whose bit i is component i.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linhash/rng.hpp"

namespace linhash {

class GF2Vector {
 public:
  explicit GF2Vector(std::size_t dim);

  // Bit i of `bits` becomes component i. Requires dim <= 64 and no bits at or
  // above position dim.
  static GF2Vector from_uint(std::size_t dim, std::uint64_t bits);
  // Components listed in index order: {1,0,1} is (x0, x1, x2) = (1, 0, 1).
  static GF2Vector from_components(std::initializer_list<int> components);
  // Most significant component first, so "0011" == from_uint(4, 3).
  static GF2Vector from_string(std::string_view text);
  static GF2Vector unit(std::size_t dim, std::size_t index);
  // Packed words as returned by words(); bits past dim are cleared.
  static GF2Vector from_words(std::size_t dim, std::vector<std::uint64_t> words);

  std::size_t dim() const { return dim_; }
  std::span<const std::uint64_t> words() const { return words_; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool value);
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  bool is_zero() const;
  std::size_t popcount() const;
  // Lowest index holding a 1, or dim() when zero.
  std::size_t lowest_set() const;
  // Parity of the bitwise AND, i.e. the GF(2) dot product.
  bool dot(const GF2Vector& other) const;
  // Requires dim() <= 64.
  std::uint64_t to_uint() const;
  std::string to_string() const;

  GF2Vector& operator^=(const GF2Vector& other);
  GF2Vector& operator&=(const GF2Vector& other);
  friend GF2Vector operator^(GF2Vector lhs, const GF2Vector& rhs) { return lhs ^= rhs; }
  friend GF2Vector operator&(GF2Vector lhs, const GF2Vector& rhs) { return lhs &= rhs; }

  friend bool operator==(const GF2Vector&, const GF2Vector&) = default;
  friend std::strong_ordering operator<=>(const GF2Vector& lhs, const GF2Vector& rhs);

 private:
  std::size_t dim_;
  std::vector<std::uint64_t> words_;
};

struct GF2VectorHash {
  std::size_t operator()(const GF2Vector& v) const noexcept;
};

GF2Vector random_vector(std::size_t dim, Rng& rng);

// A linearly independent list of vectors spanning a subspace of GF(2)^ambient_dim.
class SubspaceBasis {
 public:
  // Throws PreconditionError if `basis` is dependent, DimensionError on a dim mismatch.
  SubspaceBasis(std::size_t ambient_dim, std::vector<GF2Vector> basis);
  // Keeps a maximal independent subset of `generators`, in order.
  static SubspaceBasis span_of(std::size_t ambient_dim, std::span<const GF2Vector> generators);

  std::size_t ambient_dim() const { return ambient_dim_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<GF2Vector>& basis() const { return basis_; }

  bool contains(const GF2Vector& v) const;
  // Vector with coefficient bit i selecting basis vector i. Requires dim() < 64.
  GF2Vector combination(std::uint64_t coefficients) const;
  // All 2^dim members in coefficient order. Guarded at 2^26 members.
  std::vector<GF2Vector> members() const;

 private:
  std::size_t ambient_dim_;
  std::vector<GF2Vector> basis_;
};

// x -> Ax (+ a). Row i of A is a GF2Vector of dim in_dim; output bit i is
// parity(row_i & x) ^ a_i.
class LinearMap {
 public:
  // Zero map.
  LinearMap(std::size_t in_dim, std::size_t out_dim);
  LinearMap(std::size_t in_dim, std::vector<GF2Vector> rows,
            std::optional<GF2Vector> translation = std::nullopt);

  static LinearMap identity(std::size_t dim);
  // Row i is bits [i*in_dim, (i+1)*in_dim) of `index`; enumerates every matrix
  // as index runs over [0, 2^(in_dim*out_dim)). Requires in_dim*out_dim <= 63.
  static LinearMap from_index(std::size_t in_dim, std::size_t out_dim, std::uint64_t index);

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return rows_.size(); }
  const std::vector<GF2Vector>& rows() const { return rows_; }
  const GF2Vector& row(std::size_t i) const { return rows_[i]; }
  const std::optional<GF2Vector>& translation() const { return translation_; }
  bool is_linear() const { return !translation_.has_value(); }
  bool bit(std::size_t row, std::size_t col) const { return rows_[row].get(col); }

  LinearMap linear_part() const { return LinearMap(in_dim_, rows_); }
  LinearMap with_translation(GF2Vector translation) const;
  LinearMap with_bit_flipped(std::size_t row, std::size_t col) const;
  // Inverse of from_index. Requires in_dim*out_dim <= 63.
  std::uint64_t index() const;
  LinearMap transpose() const;

  friend bool operator==(const LinearMap&, const LinearMap&) = default;

 private:
  std::size_t in_dim_;
  std::vector<GF2Vector> rows_;
  std::optional<GF2Vector> translation_;
};

GF2Vector apply(const LinearMap& map, const GF2Vector& x);
// apply(map, x).to_uint() without the allocation. Requires out_dim <= 64.
std::uint64_t apply_packed(const LinearMap& map, const GF2Vector& x);

// T1 o T0. Both maps must be linear.
LinearMap compose(const LinearMap& outer, const LinearMap& inner);

std::size_t rank(const LinearMap& map);
SubspaceBasis kernel_basis(const LinearMap& map);
// Basis of the column span (a subspace of GF(2)^out_dim).
SubspaceBasis image_basis(const LinearMap& map);
bool is_surjective(const LinearMap& map);

// Direct-sum complement: independent of `sub`, meets span(sub) only in 0, and
// together with `sub` spans the ambient space. Built from standard unit vectors.
SubspaceBasis complement_basis(const SubspaceBasis& sub);

// The unique linear map sending basis[i] to images[i]. `basis` must be a basis of
// the whole domain GF(2)^domain_dim; images must share one dimension.
LinearMap map_from_basis_images(std::span<const GF2Vector> basis,
                                std::span<const GF2Vector> images);

// A linear G: out_dim -> in_dim with map o G = identity. `map` must be surjective.
LinearMap right_inverse(const LinearMap& map);

LinearMap sample_uniform_linear(std::size_t in_dim, std::size_t out_dim, Rng& rng);
// Uniform A and uniform translation a.
LinearMap sample_uniform_affine(std::size_t in_dim, std::size_t out_dim, Rng& rng);
// Uniform over surjective maps, by rejection. Throws PreconditionError when
// in_dim < out_dim (the family is empty).
LinearMap sample_surjective(std::size_t in_dim, std::size_t out_dim, Rng& rng);

// Uniform T0 among {T0 : u -> f | t1 o T0 = t}. That set is a coset of the
// linear maps GF(2)^u -> Ker(t1), so it has 2^((f-b)u) members for every t.
LinearMap sample_factor_t0(const LinearMap& t, const LinearMap& t1, Rng& rng);

// The factor that agrees with a given map Ker(t) -> Ker(t1) on the kernel basis
// (kernel_images[i] is the image of kernel_basis(t)[i]) and equals
// right_inverse(t1) o t on the complement of Ker(t). Injective in the kernel
// map, so it reaches 2^((f-b) dim Ker t) factors, not all of them unless t = 0.
LinearMap factor_from_kernel_map(const LinearMap& t, const LinearMap& t1,
                                 const std::vector<GF2Vector>& kernel_images);

// Exhaustive count of T0 with t1 o T0 = t. Refuses above 2^22 candidates.
std::uint64_t count_factorizations(const LinearMap& t, const LinearMap& t1);

inline constexpr std::size_t kMaxEnumeratedObjects = std::size_t{1} << 22;

}  // namespace linhash
