#include "linhash/gf2.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <utility>

#include "linhash/errors.hpp"

namespace linhash {

namespace {

std::size_t word_count(std::size_t dim) { return (dim + 63) / 64; }

std::uint64_t tail_mask(std::size_t dim) {
  const std::size_t used = dim & 63;
  return used == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
}

void require_dim(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

// Reduced row echelon form. Row k has its pivot at pivots[k] and is the only
// row with a 1 in that column.
struct Echelon {
  std::vector<GF2Vector> rows;
  std::vector<std::size_t> pivots;
};

Echelon row_reduce(std::vector<GF2Vector> rows, std::size_t dim) {
  Echelon out;
  std::size_t next = 0;
  for (std::size_t col = 0; col < dim && next < rows.size(); ++col) {
    std::size_t r = next;
    while (r < rows.size() && !rows[r].get(col)) ++r;
    if (r == rows.size()) continue;
    std::swap(rows[r], rows[next]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != next && rows[i].get(col)) rows[i] ^= rows[next];
    }
    out.pivots.push_back(col);
    ++next;
  }
  rows.resize(next, GF2Vector(dim));
  out.rows = std::move(rows);
  return out;
}

// XOR basis with one pivot per stored vector; insert() reports independence.
class IncrementalBasis {
 public:
  bool insert(GF2Vector v) {
    reduce(v);
    if (v.is_zero()) return false;
    pivots_.push_back(v.lowest_set());
    reduced_.push_back(std::move(v));
    return true;
  }
  void reduce(GF2Vector& v) const {
    for (std::size_t k = 0; k < reduced_.size(); ++k) {
      if (v.get(pivots_[k])) v ^= reduced_[k];
    }
  }

 private:
  std::vector<GF2Vector> reduced_;
  std::vector<std::size_t> pivots_;
};

}  // namespace

// ---------------------------------------------------------------- GF2Vector

GF2Vector::GF2Vector(std::size_t dim) : dim_(dim), words_(word_count(dim), 0) {
  require_dim(dim >= 1, "GF2Vector dimension must be at least 1");
}

GF2Vector GF2Vector::from_uint(std::size_t dim, std::uint64_t bits) {
  require_dim(dim >= 1 && dim <= 64, "from_uint requires 1 <= dim <= 64");
  if (dim < 64 && (bits >> dim) != 0) {
    throw DimensionError("from_uint: bits set beyond dimension " + std::to_string(dim));
  }
  GF2Vector v(dim);
  v.words_[0] = bits;
  return v;
}

GF2Vector GF2Vector::from_components(std::initializer_list<int> components) {
  GF2Vector v(components.size());
  std::size_t i = 0;
  for (int c : components) v.set(i++, c != 0);
  return v;
}

GF2Vector GF2Vector::from_string(std::string_view text) {
  GF2Vector v(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[text.size() - 1 - i];
    if (c != '0' && c != '1') throw std::invalid_argument("GF2Vector::from_string: expected 0/1");
    v.set(i, c == '1');
  }
  return v;
}

GF2Vector GF2Vector::unit(std::size_t dim, std::size_t index) {
  require_dim(index < dim, "unit vector index out of range");
  GF2Vector v(dim);
  v.flip(index);
  return v;
}

GF2Vector GF2Vector::from_words(std::size_t dim, std::vector<std::uint64_t> words) {
  GF2Vector v(dim);
  require_dim(words.size() == v.words_.size(), "from_words: wrong word count");
  words.back() &= tail_mask(dim);
  v.words_ = std::move(words);
  return v;
}

void GF2Vector::set(std::size_t i, bool value) {
  const std::uint64_t bit = std::uint64_t{1} << (i & 63);
  if (value) {
    words_[i >> 6] |= bit;
  } else {
    words_[i >> 6] &= ~bit;
  }
}

bool GF2Vector::is_zero() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t GF2Vector::popcount() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t GF2Vector::lowest_set() const {
  for (std::size_t k = 0; k < words_.size(); ++k) {
    if (words_[k] != 0) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
  }
  return dim_;
}

bool GF2Vector::dot(const GF2Vector& other) const {
  require_dim(dim_ == other.dim_, "dot: dimension mismatch");
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < words_.size(); ++k) acc ^= words_[k] & other.words_[k];
  return (std::popcount(acc) & 1) != 0;
}

std::uint64_t GF2Vector::to_uint() const {
  require_dim(dim_ <= 64, "to_uint requires dim <= 64");
  return words_[0];
}

std::string GF2Vector::to_string() const {
  std::string s(dim_, '0');
  for (std::size_t i = 0; i < dim_; ++i) {
    if (get(i)) s[dim_ - 1 - i] = '1';
  }
  return s;
}

GF2Vector& GF2Vector::operator^=(const GF2Vector& other) {
  require_dim(dim_ == other.dim_, "xor: dimension mismatch");
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
  return *this;
}

GF2Vector& GF2Vector::operator&=(const GF2Vector& other) {
  require_dim(dim_ == other.dim_, "and: dimension mismatch");
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
  return *this;
}

std::strong_ordering operator<=>(const GF2Vector& lhs, const GF2Vector& rhs) {
  if (auto c = lhs.dim_ <=> rhs.dim_; c != 0) return c;
  for (std::size_t k = lhs.words_.size(); k-- > 0;) {
    if (auto c = lhs.words_[k] <=> rhs.words_[k]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t GF2VectorHash::operator()(const GF2Vector& v) const noexcept {
  std::uint64_t h = splitmix64(v.dim());
  for (std::uint64_t w : v.words()) h = splitmix64(h ^ w);
  return static_cast<std::size_t>(h);
}

GF2Vector random_vector(std::size_t dim, Rng& rng) {
  std::vector<std::uint64_t> words(word_count(dim));
  for (auto& w : words) w = rng();
  return GF2Vector::from_words(dim, std::move(words));
}

// ------------------------------------------------------------ SubspaceBasis

SubspaceBasis::SubspaceBasis(std::size_t ambient_dim, std::vector<GF2Vector> basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
  require_dim(ambient_dim >= 1, "subspace ambient dimension must be at least 1");
  IncrementalBasis check;
  for (const auto& v : basis_) {
    require_dim(v.dim() == ambient_dim_, "subspace basis vector has wrong dimension");
    if (!check.insert(v)) throw PreconditionError("subspace basis vectors are linearly dependent");
  }
}

SubspaceBasis SubspaceBasis::span_of(std::size_t ambient_dim,
                                     std::span<const GF2Vector> generators) {
  IncrementalBasis reducer;
  std::vector<GF2Vector> kept;
  for (const auto& g : generators) {
    require_dim(g.dim() == ambient_dim, "span_of: generator has wrong dimension");
    if (reducer.insert(g)) kept.push_back(g);
  }
  return SubspaceBasis(ambient_dim, std::move(kept));
}

bool SubspaceBasis::contains(const GF2Vector& v) const {
  require_dim(v.dim() == ambient_dim_, "contains: dimension mismatch");
  IncrementalBasis reducer;
  for (const auto& b : basis_) reducer.insert(b);
  GF2Vector r = v;
  reducer.reduce(r);
  return r.is_zero();
}

GF2Vector SubspaceBasis::combination(std::uint64_t coefficients) const {
  GF2Vector v(ambient_dim_);
  for (std::size_t i = 0; i < basis_.size() && i < 64; ++i) {
    if ((coefficients >> i) & 1U) v ^= basis_[i];
  }
  return v;
}

std::vector<GF2Vector> SubspaceBasis::members() const {
  if (dim() > 26) throw SizeGuardError("subspace too large to enumerate");
  std::vector<GF2Vector> out;
  out.reserve(std::size_t{1} << dim());
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << dim()); ++c) out.push_back(combination(c));
  return out;
}

// ---------------------------------------------------------------- LinearMap

LinearMap::LinearMap(std::size_t in_dim, std::size_t out_dim)
    : in_dim_(in_dim), rows_(out_dim, GF2Vector(in_dim == 0 ? 1 : in_dim)) {
  require_dim(in_dim >= 1 && out_dim >= 1, "linear map dimensions must be at least 1");
}

LinearMap::LinearMap(std::size_t in_dim, std::vector<GF2Vector> rows,
                     std::optional<GF2Vector> translation)
    : in_dim_(in_dim), rows_(std::move(rows)), translation_(std::move(translation)) {
  require_dim(in_dim >= 1 && !rows_.empty(), "linear map dimensions must be at least 1");
  for (const auto& r : rows_) require_dim(r.dim() == in_dim_, "matrix row has wrong dimension");
  if (translation_) {
    require_dim(translation_->dim() == rows_.size(), "translation has wrong dimension");
  }
}

LinearMap LinearMap::identity(std::size_t dim) {
  std::vector<GF2Vector> rows;
  rows.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) rows.push_back(GF2Vector::unit(dim, i));
  return LinearMap(dim, std::move(rows));
}

LinearMap LinearMap::from_index(std::size_t in_dim, std::size_t out_dim, std::uint64_t index) {
  require_dim(in_dim * out_dim <= 63, "from_index requires in_dim*out_dim <= 63");
  const std::uint64_t mask = (std::uint64_t{1} << in_dim) - 1;
  std::vector<GF2Vector> rows;
  rows.reserve(out_dim);
  for (std::size_t i = 0; i < out_dim; ++i) {
    rows.push_back(GF2Vector::from_uint(in_dim, (index >> (i * in_dim)) & mask));
  }
  return LinearMap(in_dim, std::move(rows));
}

LinearMap LinearMap::with_translation(GF2Vector translation) const {
  return LinearMap(in_dim_, rows_, std::move(translation));
}

LinearMap LinearMap::with_bit_flipped(std::size_t row, std::size_t col) const {
  require_dim(row < rows_.size() && col < in_dim_, "with_bit_flipped: index out of range");
  LinearMap copy = *this;
  copy.rows_[row].flip(col);
  return copy;
}

std::uint64_t LinearMap::index() const {
  require_dim(in_dim_ * rows_.size() <= 63, "index requires in_dim*out_dim <= 63");
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) idx |= rows_[i].to_uint() << (i * in_dim_);
  return idx;
}

LinearMap LinearMap::transpose() const {
  std::vector<GF2Vector> cols(in_dim_, GF2Vector(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t j = 0; j < in_dim_; ++j) {
      if (rows_[i].get(j)) cols[j].set(i, true);
    }
  }
  return LinearMap(rows_.size(), std::move(cols));
}

// --------------------------------------------------------------- operations

GF2Vector apply(const LinearMap& map, const GF2Vector& x) {
  require_dim(x.dim() == map.in_dim(), "apply: input dimension mismatch");
  GF2Vector y = map.translation().value_or(GF2Vector(map.out_dim()));
  for (std::size_t i = 0; i < map.out_dim(); ++i) {
    if (map.row(i).dot(x)) y.flip(i);
  }
  return y;
}

std::uint64_t apply_packed(const LinearMap& map, const GF2Vector& x) {
  require_dim(x.dim() == map.in_dim(), "apply: input dimension mismatch");
  require_dim(map.out_dim() <= 64, "apply_packed requires out_dim <= 64");
  const auto xs = x.words();
  std::uint64_t y = map.translation() ? map.translation()->to_uint() : 0;
  for (std::size_t i = 0; i < map.out_dim(); ++i) {
    const auto rs = map.row(i).words();
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) acc ^= rs[k] & xs[k];
    y ^= static_cast<std::uint64_t>(std::popcount(acc) & 1) << i;
  }
  return y;
}

LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
  if (!outer.is_linear() || !inner.is_linear()) {
    throw PreconditionError("compose: both maps must be linear");
  }
  require_dim(outer.in_dim() == inner.out_dim(), "compose: inner output != outer input");
  std::vector<GF2Vector> rows;
  rows.reserve(outer.out_dim());
  for (const auto& orow : outer.rows()) {
    GF2Vector r(inner.in_dim());
    for (std::size_t j = 0; j < inner.out_dim(); ++j) {
      if (orow.get(j)) r ^= inner.row(j);
    }
    rows.push_back(std::move(r));
  }
  return LinearMap(inner.in_dim(), std::move(rows));
}

std::size_t rank(const LinearMap& map) {
  return row_reduce(map.rows(), map.in_dim()).rows.size();
}

SubspaceBasis kernel_basis(const LinearMap& map) {
  const Echelon e = row_reduce(map.rows(), map.in_dim());
  std::vector<bool> is_pivot(map.in_dim(), false);
  for (std::size_t p : e.pivots) is_pivot[p] = true;
  std::vector<GF2Vector> basis;
  for (std::size_t free = 0; free < map.in_dim(); ++free) {
    if (is_pivot[free]) continue;
    GF2Vector v = GF2Vector::unit(map.in_dim(), free);
    for (std::size_t r = 0; r < e.rows.size(); ++r) {
      if (e.rows[r].get(free)) v.set(e.pivots[r], true);
    }
    basis.push_back(std::move(v));
  }
  return SubspaceBasis(map.in_dim(), std::move(basis));
}

SubspaceBasis image_basis(const LinearMap& map) {
  Echelon e = row_reduce(map.transpose().rows(), map.out_dim());
  return SubspaceBasis(map.out_dim(), std::move(e.rows));
}

bool is_surjective(const LinearMap& map) { return rank(map) == map.out_dim(); }

SubspaceBasis complement_basis(const SubspaceBasis& sub) {
  const Echelon e = row_reduce(sub.basis(), sub.ambient_dim());
  std::vector<bool> is_pivot(sub.ambient_dim(), false);
  for (std::size_t p : e.pivots) is_pivot[p] = true;
  std::vector<GF2Vector> out;
  for (std::size_t j = 0; j < sub.ambient_dim(); ++j) {
    if (!is_pivot[j]) out.push_back(GF2Vector::unit(sub.ambient_dim(), j));
  }
  return SubspaceBasis(sub.ambient_dim(), std::move(out));
}

LinearMap map_from_basis_images(std::span<const GF2Vector> basis,
                                std::span<const GF2Vector> images) {
  require_dim(!basis.empty() && basis.size() == images.size(),
              "map_from_basis_images: need one image per basis vector");
  const std::size_t n = basis.front().dim();
  const std::size_t m = images.front().dim();
  require_dim(basis.size() == n, "map_from_basis_images: basis must span the whole domain");
  std::vector<GF2Vector> vs(basis.begin(), basis.end());
  std::vector<GF2Vector> ws(images.begin(), images.end());
  for (std::size_t k = 0; k < n; ++k) {
    require_dim(vs[k].dim() == n && ws[k].dim() == m, "map_from_basis_images: mixed dimensions");
  }
  // Row-reduce [V | W] until V is the identity; then row k reads (e_k, A e_k).
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t r = col;
    while (r < n && !vs[r].get(col)) ++r;
    if (r == n) throw PreconditionError("map_from_basis_images: vectors are not a basis");
    std::swap(vs[r], vs[col]);
    std::swap(ws[r], ws[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != col && vs[i].get(col)) {
        vs[i] ^= vs[col];
        ws[i] ^= ws[col];
      }
    }
  }
  std::vector<GF2Vector> rows(m, GF2Vector(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      if (ws[k].get(i)) rows[i].set(k, true);
    }
  }
  return LinearMap(n, std::move(rows));
}

LinearMap right_inverse(const LinearMap& map) {
  if (!map.is_linear()) throw PreconditionError("right_inverse: map must be linear");
  if (!is_surjective(map)) throw PreconditionError("right_inverse: map is not surjective");
  const SubspaceBasis section = complement_basis(kernel_basis(map));
  std::vector<GF2Vector> images;
  images.reserve(section.dim());
  for (const auto& c : section.basis()) images.push_back(apply(map, c));
  return map_from_basis_images(images, section.basis());
}

LinearMap sample_uniform_linear(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  require_dim(in_dim >= 1 && out_dim >= 1, "sample_uniform_linear: dims must be >= 1");
  std::vector<GF2Vector> rows;
  rows.reserve(out_dim);
  for (std::size_t i = 0; i < out_dim; ++i) rows.push_back(random_vector(in_dim, rng));
  return LinearMap(in_dim, std::move(rows));
}

LinearMap sample_uniform_affine(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  LinearMap a = sample_uniform_linear(in_dim, out_dim, rng);
  return a.with_translation(random_vector(out_dim, rng));
}

LinearMap sample_surjective(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  if (in_dim < out_dim) {
    throw PreconditionError("sample_surjective: no surjective map from dim " +
                            std::to_string(in_dim) + " onto dim " + std::to_string(out_dim));
  }
  for (;;) {
    LinearMap m = sample_uniform_linear(in_dim, out_dim, rng);
    if (is_surjective(m)) return m;
  }
}

LinearMap sample_factor_t0(const LinearMap& t, const LinearMap& t1, Rng& rng) {
  if (!t.is_linear() || !t1.is_linear()) {
    throw PreconditionError("sample_factor_t0: maps must be linear");
  }
  require_dim(t.out_dim() == t1.out_dim(), "sample_factor_t0: T and T1 must share a codomain");
  const LinearMap section = right_inverse(t1);  // throws if t1 is not onto
  const SubspaceBasis ker_t1 = kernel_basis(t1);

  // T0(x) = section(T(x)) + N(x) with N uniform among linear maps into Ker(T1).
  std::vector<GF2Vector> basis;
  std::vector<GF2Vector> images;
  basis.reserve(t.in_dim());
  images.reserve(t.in_dim());
  for (std::size_t i = 0; i < t.in_dim(); ++i) {
    GF2Vector e = GF2Vector::unit(t.in_dim(), i);
    GF2Vector img = apply(section, apply(t, e));
    for (const auto& g : ker_t1.basis()) {
      if (rng() & 1U) img ^= g;
    }
    basis.push_back(std::move(e));
    images.push_back(std::move(img));
  }
  return map_from_basis_images(basis, images);
}

LinearMap factor_from_kernel_map(const LinearMap& t, const LinearMap& t1,
                                 const std::vector<GF2Vector>& kernel_images) {
  if (!t.is_linear() || !t1.is_linear()) {
    throw PreconditionError("factor_from_kernel_map: maps must be linear");
  }
  require_dim(t.out_dim() == t1.out_dim(), "factor_from_kernel_map: T and T1 must share a codomain");
  const LinearMap section = right_inverse(t1);
  const SubspaceBasis ker_t = kernel_basis(t);
  const SubspaceBasis rest = complement_basis(ker_t);
  require_dim(kernel_images.size() == ker_t.dim(),
              "factor_from_kernel_map: need one image per kernel basis vector");

  std::vector<GF2Vector> basis;
  std::vector<GF2Vector> images;
  for (std::size_t i = 0; i < ker_t.dim(); ++i) {
    if (apply(t1, kernel_images[i]).popcount() != 0) {
      throw PreconditionError("factor_from_kernel_map: kernel images must lie in Ker(T1)");
    }
    basis.push_back(ker_t.basis()[i]);
    images.push_back(kernel_images[i]);
  }
  for (const auto& c : rest.basis()) {
    basis.push_back(c);
    images.push_back(apply(section, apply(t, c)));
  }
  return map_from_basis_images(basis, images);
}

std::uint64_t count_factorizations(const LinearMap& t, const LinearMap& t1) {
  if (!t.is_linear() || !t1.is_linear()) {
    throw PreconditionError("count_factorizations: maps must be linear");
  }
  require_dim(t.out_dim() == t1.out_dim(), "count_factorizations: T and T1 must share a codomain");
  const std::size_t u = t.in_dim();
  const std::size_t f = t1.in_dim();
  if (u * f > 22) throw SizeGuardError("count_factorizations: 2^(u*f) candidates exceed 2^22");

  // Candidate T0 = from_index(u, f, idx): row j is bits [j*u, (j+1)*u) of idx, and
  // row i of T1 o T0 is the XOR of the T0 rows selected by row i of T1.
  const std::uint64_t row_mask = (std::uint64_t{1} << u) - 1;
  std::vector<std::uint64_t> target(t.out_dim());
  std::vector<std::uint64_t> outer(t1.out_dim());
  for (std::size_t i = 0; i < t.out_dim(); ++i) {
    target[i] = t.row(i).to_uint();
    outer[i] = t1.row(i).to_uint();
  }
  std::uint64_t count = 0;
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << (u * f)); ++idx) {
    bool match = true;
    for (std::size_t i = 0; i < outer.size() && match; ++i) {
      std::uint64_t row = 0;
      for (std::uint64_t sel = outer[i]; sel != 0; sel &= sel - 1) {
        row ^= (idx >> (static_cast<std::size_t>(std::countr_zero(sel)) * u)) & row_mask;
      }
      match = row == target[i];
    }
    if (match) ++count;
  }
  return count;
}

}  // namespace linhash
