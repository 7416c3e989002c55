#include "linhash/ballsbins.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "linhash/errors.hpp"
#include "linhash/stats.hpp"

namespace linhash {

namespace {

constexpr std::size_t kMaxSetSize = std::size_t{1} << 26;

// 2^dim, saturating for dims that do not fit.
std::uint64_t pow2_sat(std::size_t dim) {
  return dim >= 64 ? UINT64_MAX : std::uint64_t{1} << dim;
}

GF2Vector vector_from_index(std::size_t dim, std::uint64_t index) {
  std::vector<std::uint64_t> words((dim + 63) / 64, 0);
  words[0] = index;
  return GF2Vector::from_words(dim, std::move(words));
}

void require_universe(const LinearMap& map, const BallSet& balls) {
  if (map.in_dim() != balls.universe_dim()) {
    throw DimensionError("map input dimension " + std::to_string(map.in_dim()) +
                         " != ball universe dimension " + std::to_string(balls.universe_dim()));
  }
}

// Column images c_j = T(e_j) of a linear map with out_dim <= 64, so that
// T(x) is the XOR of c_j over the set bits j of x.
std::vector<std::uint64_t> packed_columns(const LinearMap& map) {
  std::vector<std::uint64_t> cols(map.in_dim(), 0);
  for (std::size_t i = 0; i < map.out_dim(); ++i) {
    for (std::size_t j = 0; j < map.in_dim(); ++j) {
      if (map.bit(i, j)) cols[j] |= std::uint64_t{1} << i;
    }
  }
  return cols;
}

std::uint64_t apply_columns(std::span<const std::uint64_t> cols, std::uint64_t x) {
  std::uint64_t y = 0;
  while (x != 0) {
    y ^= cols[static_cast<std::size_t>(std::countr_zero(x))];
    x &= x - 1;
  }
  return y;
}

void require_e2_inputs(const BallSet& balls, const LinearMap& t0, const LinearMap& t1) {
  if (!t0.is_linear() || !t1.is_linear()) throw PreconditionError("E2: maps must be linear");
  require_universe(t0, balls);
  if (t0.out_dim() != t1.in_dim()) throw DimensionError("E2: T0 output dim != T1 input dim");
  if (t1.in_dim() > kMaxE2Dim) {
    throw SizeGuardError("E2: intermediate dimension f exceeds " + std::to_string(kMaxE2Dim));
  }
  if (!is_surjective(t1)) throw PreconditionError("E2: T1 must be surjective");
}

std::vector<GF2Vector> subspace_members(const SubspaceBasis& basis, const GF2Vector& offset) {
  std::vector<GF2Vector> out = basis.members();
  for (auto& v : out) v ^= offset;
  return out;
}

}  // namespace

// ----------------------------------------------------------------- sets

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::kInterval: return "interval";
    case SetKind::kRandom: return "random";
    case SetKind::kSubspace: return "subspace";
    case SetKind::kAffineSubspace: return "affine";
    case SetKind::kCluster: return "cluster";
  }
  return "unknown";
}

SetKind parse_set_kind(std::string_view name) {
  if (name == "interval") return SetKind::kInterval;
  if (name == "random") return SetKind::kRandom;
  if (name == "subspace") return SetKind::kSubspace;
  if (name == "affine" || name == "affine_subspace") return SetKind::kAffineSubspace;
  if (name == "cluster") return SetKind::kCluster;
  throw std::invalid_argument("unknown set kind '" + std::string(name) + "'");
}

bool takes_dimension(SetKind kind) {
  return kind == SetKind::kSubspace || kind == SetKind::kAffineSubspace;
}

BallSet BallSet::from_members(std::size_t universe_dim, std::vector<GF2Vector> members,
                              SetDescriptor descriptor) {
  if (members.empty()) throw PreconditionError("ball set must be non-empty");
  BallSet s;
  s.universe_dim_ = universe_dim;
  s.descriptor_ = descriptor;
  std::unordered_set<GF2Vector, GF2VectorHash> seen;
  seen.reserve(members.size());
  s.members_.reserve(members.size());
  for (auto& m : members) {
    if (m.dim() != universe_dim) throw DimensionError("ball has wrong dimension");
    if (seen.insert(m).second) s.members_.push_back(std::move(m));
  }
  return s;
}

BallSet BallSet::from_subspace(SubspaceBasis basis, std::optional<GF2Vector> offset) {
  const std::size_t u = basis.ambient_dim();
  if (offset && offset->dim() != u) throw DimensionError("subspace offset has wrong dimension");
  BallSet s;
  s.universe_dim_ = u;
  s.descriptor_ = {offset ? SetKind::kAffineSubspace : SetKind::kSubspace, basis.dim()};
  s.members_ = subspace_members(basis, offset.value_or(GF2Vector(u)));
  s.basis_ = std::move(basis);
  s.offset_ = std::move(offset);
  return s;
}

namespace {

SubspaceBasis random_subspace(std::size_t u, std::size_t dim, Rng& rng) {
  std::vector<GF2Vector> basis;
  while (basis.size() < dim) {
    GF2Vector v = random_vector(u, rng);
    if (v.is_zero()) continue;
    if (!basis.empty() && SubspaceBasis(u, basis).contains(v)) continue;
    basis.push_back(std::move(v));
  }
  return SubspaceBasis(u, std::move(basis));
}

// Appends uniform vectors not yet present until `members` holds `target` entries.
void fill_distinct(std::size_t u, std::size_t target, std::vector<GF2Vector>& members, Rng& rng) {
  std::unordered_set<GF2Vector, GF2VectorHash> seen(members.begin(), members.end());
  const std::uint64_t universe = pow2_sat(u);
  if (u <= 26 && target * 2 > universe) {
    // Dense regime: shuffle the unused part of the universe.
    std::vector<std::uint64_t> pool;
    pool.reserve(universe - members.size());
    for (std::uint64_t i = 0; i < universe; ++i) {
      if (!seen.contains(vector_from_index(u, i))) pool.push_back(i);
    }
    const std::size_t need = target - members.size();
    for (std::size_t k = 0; k < need; ++k) {
      const auto j = k + uniform_below(rng, pool.size() - k);
      std::swap(pool[k], pool[j]);
      members.push_back(vector_from_index(u, pool[k]));
    }
    return;
  }
  while (members.size() < target) {
    GF2Vector v = random_vector(u, rng);
    if (seen.insert(v).second) members.push_back(std::move(v));
  }
}

}  // namespace

BallSet generate_set(SetKind kind, std::size_t u, std::size_t param, Rng& rng) {
  if (u == 0) throw std::invalid_argument("universe dimension must be at least 1");
  if (takes_dimension(kind)) {
    if (param > u) {
      throw std::invalid_argument("subspace dimension " + std::to_string(param) +
                                  " exceeds universe dimension " + std::to_string(u));
    }
    if (param > 26) throw SizeGuardError("subspace of dimension > 26 is too large to materialise");
    SubspaceBasis basis = random_subspace(u, param, rng);
    if (kind == SetKind::kSubspace) return BallSet::from_subspace(std::move(basis));
    return BallSet::from_subspace(std::move(basis), random_vector(u, rng));
  }
  if (param == 0) throw std::invalid_argument("set size must be at least 1");
  if (param > pow2_sat(u)) {
    throw std::invalid_argument("set size " + std::to_string(param) + " exceeds 2^" +
                                std::to_string(u));
  }
  if (param > kMaxSetSize) throw SizeGuardError("set size exceeds 2^26");

  std::vector<GF2Vector> members;
  members.reserve(param);
  switch (kind) {
    case SetKind::kInterval:
      for (std::uint64_t i = 0; i < param; ++i) members.push_back(vector_from_index(u, i));
      break;
    case SetKind::kRandom:
      fill_distinct(u, param, members, rng);
      break;
    case SetKind::kCluster: {
      const std::size_t dim =
          param < 4 ? 0 : static_cast<std::size_t>(std::bit_width(param)) - 2;
      members = random_subspace(u, std::min(dim, u), rng).members();
      fill_distinct(u, param, members, rng);
      break;
    }
    default:
      break;
  }
  return BallSet::from_members(u, std::move(members), {kind, param});
}

// ------------------------------------------------------------------- bins

std::size_t BinHistogram::total() const {
  std::size_t n = 0;
  for (const auto& [label, c] : counts) n += c;
  return n;
}

std::size_t BinHistogram::largest() const {
  std::size_t m = 0;
  for (const auto& [label, c] : counts) m = std::max(m, c);
  return m;
}

std::size_t BinHistogram::count(const GF2Vector& label) const {
  auto it = counts.find(label);
  return it == counts.end() ? 0 : it->second;
}

BinHistogram bin_counts(const LinearMap& map, const BallSet& balls) {
  require_universe(map, balls);
  BinHistogram h;
  h.bin_dim = map.out_dim();
  if (map.out_dim() <= 64) {
    std::unordered_map<std::uint64_t, std::size_t> packed;
    for (const auto& s : balls.members()) ++packed[apply_packed(map, s)];
    for (const auto& [y, c] : packed) h.counts.emplace(GF2Vector::from_uint(map.out_dim(), y), c);
  } else {
    for (const auto& s : balls.members()) ++h.counts[apply(map, s)];
  }
  return h;
}

std::size_t largest_bin(const LinearMap& map, const BallSet& balls) {
  require_universe(map, balls);
  const std::size_t b = map.out_dim();
  if (b > 64) return bin_counts(map, balls).largest();

  std::size_t best = 0;
  const bool dense = b <= 16 || (b <= 24 && (std::uint64_t{1} << b) <= 4 * balls.size());
  if (dense) {
    std::vector<std::uint32_t> counts(std::size_t{1} << b, 0);
    if (map.in_dim() <= 64) {
      const auto cols = packed_columns(map.linear_part());
      const std::uint64_t shift = map.translation() ? map.translation()->to_uint() : 0;
      for (const auto& s : balls.members()) {
        const auto c = ++counts[apply_columns(cols, s.words()[0]) ^ shift];
        best = std::max<std::size_t>(best, c);
      }
    } else {
      for (const auto& s : balls.members()) {
        best = std::max<std::size_t>(best, ++counts[apply_packed(map, s)]);
      }
    }
    return best;
  }
  std::unordered_map<std::uint64_t, std::size_t> counts;
  counts.reserve(balls.size());
  for (const auto& s : balls.members()) best = std::max(best, ++counts[apply_packed(map, s)]);
  return best;
}

bool event_e1(const BallSet& balls, const LinearMap& map, std::size_t ell) {
  if (ell == 0) throw PreconditionError("event_e1 requires ell >= 1");
  return largest_bin(map, balls) >= ell;
}

bool event_e2(const BallSet& balls, const LinearMap& t0, const LinearMap& t1) {
  require_e2_inputs(balls, t0, t1);
  const std::size_t f = t1.in_dim();
  const std::size_t b = t1.out_dim();
  const std::uint64_t points = std::uint64_t{1} << f;

  std::vector<bool> in_image(points, false);
  for (const auto& s : balls.members()) in_image[apply_packed(t0, s)] = true;

  // E2 <=> T1 applied to the complement of T0(S) misses some label.
  const auto cols = packed_columns(t1);
  std::vector<bool> hit(std::size_t{1} << b, false);
  std::uint64_t labels_hit = 0;
  for (std::uint64_t z = 0; z < points; ++z) {
    if (in_image[z]) continue;
    const std::uint64_t y = apply_columns(cols, z);
    if (!hit[y]) {
      hit[y] = true;
      if (++labels_hit == (std::uint64_t{1} << b)) return false;
    }
  }
  return true;
}

bool event_e2_direct(const BallSet& balls, const LinearMap& t0, const LinearMap& t1) {
  require_e2_inputs(balls, t0, t1);
  std::set<GF2Vector> image;
  for (const auto& s : balls.members()) image.insert(apply(t0, s));

  const LinearMap section = right_inverse(t1);
  const std::vector<GF2Vector> kernel = kernel_basis(t1).members();
  const std::size_t b = t1.out_dim();
  for (std::uint64_t yi = 0; yi < (std::uint64_t{1} << b); ++yi) {
    const GF2Vector base = apply(section, GF2Vector::from_uint(b, yi));
    const bool covered = std::all_of(kernel.begin(), kernel.end(),
                                     [&](const GF2Vector& k) { return image.contains(base ^ k); });
    if (covered) return true;
  }
  return false;
}

ImplicationReport check_e1_e2_implication(const BallSet& balls, const LinearMap& t0,
                                          const LinearMap& t1, std::size_t ell) {
  if (ell == 0) throw PreconditionError("check_e1_e2_implication requires ell >= 1");
  require_e2_inputs(balls, t0, t1);
  const LinearMap t = compose(t1, t0);
  ImplicationReport report;
  report.e2 = event_e2(balls, t0, t1);

  const BinHistogram hist = bin_counts(t, balls);
  report.e1 = hist.largest() >= ell;
  if (!report.e1) return report;

  const SubspaceBasis ker_t = kernel_basis(t);
  const LinearMap section = right_inverse(t1);
  const std::vector<GF2Vector> ker_t1 = kernel_basis(t1).members();
  for (const auto& [label, count] : hist.counts) {
    if (count < ell) continue;
    std::vector<GF2Vector> heavy;
    for (const auto& s : balls.members()) {
      if (apply(t, s) == label) heavy.push_back(s);
    }
    std::set<GF2Vector> heavy_image;
    for (const auto& s : heavy) heavy_image.insert(apply(t0, s));

    const GF2Vector base = apply(section, label);
    std::vector<GF2Vector> fiber;
    fiber.reserve(ker_t1.size());
    bool covered = true;
    for (const auto& k : ker_t1) {
      fiber.push_back(base ^ k);
      covered = covered && heavy_image.contains(fiber.back());
    }
    if (covered && !report.e2) ++report.violations;
    GF2Vector offset = heavy.front();
    report.witnesses.push_back(
        {label, std::move(offset), ker_t, std::move(heavy), std::move(fiber), covered});
  }
  return report;
}

SmallInstance sample_small_instance(Rng& rng, std::size_t max_u, std::size_t max_f,
                                    std::size_t max_b) {
  if (max_u == 0 || max_f == 0 || max_b == 0) {
    throw std::invalid_argument("sample_small_instance: limits must be >= 1");
  }
  const std::size_t u = 1 + uniform_below(rng, max_u);
  const std::size_t f = 1 + uniform_below(rng, std::min(u, max_f));
  const std::size_t b = 1 + uniform_below(rng, std::min(f, max_b));
  const std::size_t size = 1 + uniform_below(rng, std::uint64_t{1} << u);
  BallSet balls = generate_set(SetKind::kRandom, u, size, rng);
  LinearMap t0 = sample_uniform_linear(u, f, rng);
  LinearMap t1 = sample_surjective(f, b, rng);
  return {std::move(balls), std::move(t0), std::move(t1)};
}

// ------------------------------------------------------------ Monte Carlo

BallSet experiment_set(const ExperimentConfig& config) {
  Rng rng = make_substream(config.master_seed, kSetStream);
  return generate_set(config.set.kind, config.u, config.set.param, rng);
}

TrialSummary run_trials(const ExperimentConfig& config, const BallSet& balls) {
  if (config.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (config.b == 0) throw std::invalid_argument("bin dimension b must be at least 1");
  if (balls.universe_dim() != config.u) throw DimensionError("ball set universe != config.u");
  for (std::size_t ell : config.thresholds) {
    if (ell == 0) throw std::invalid_argument("thresholds must be >= 1");
  }

  TrialSummary out;
  out.config = config;
  out.set_size = balls.size();
  out.rng_algorithm = std::string(kRngAlgorithm);
  out.lbins.assign(config.trials, 0);

  const unsigned jobs = std::max(1U, std::min<unsigned>(config.jobs, config.trials));
  auto work = [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      Rng rng = make_substream(config.master_seed, i);
      out.lbins[i] = largest_bin(sample_uniform_linear(config.u, config.b, rng), balls);
    }
  };
  if (jobs == 1) {
    work(0, config.trials);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    const std::size_t chunk = (config.trials + jobs - 1) / jobs;
    for (unsigned j = 0; j < jobs; ++j) {
      const std::size_t first = std::min(config.trials, j * chunk);
      const std::size_t last = std::min(config.trials, first + chunk);
      pool.emplace_back([&, j, first, last] {
        try {
          work(first, last);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> values(out.lbins.begin(), out.lbins.end());
  out.mean = stats::mean(values);
  out.std_error = stats::standard_error(values);
  std::sort(values.begin(), values.end());
  out.median = stats::quantile_sorted(values, 0.5);
  out.p90 = stats::quantile_sorted(values, 0.9);
  out.p99 = stats::quantile_sorted(values, 0.99);
  out.min = static_cast<std::size_t>(values.front());
  out.max = static_cast<std::size_t>(values.back());
  for (std::size_t ell : config.thresholds) {
    const auto hits = static_cast<std::uint64_t>(
        std::count_if(out.lbins.begin(), out.lbins.end(), [ell](std::size_t l) { return l >= ell; }));
    const auto ci = stats::wilson_interval(hits, config.trials);
    out.tails.push_back({ell, hits, static_cast<double>(hits) / static_cast<double>(config.trials),
                         ci.lo, ci.hi});
  }
  return out;
}

TrialSummary simulate(const ExperimentConfig& config) {
  return run_trials(config, experiment_set(config));
}

TrialSummary estimate_tail(const ExperimentConfig& config) {
  if (config.thresholds.empty()) throw std::invalid_argument("estimate_tail needs thresholds");
  return simulate(config);
}

// ---------------------------------------------------------- exact oracles

Rational Rational::reduced(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::string Rational::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational ExactLbinDistribution::expected() const {
  std::uint64_t weighted = 0;
  for (const auto& [lbin, maps] : maps_by_lbin) weighted += lbin * maps;
  return Rational::reduced(weighted, total_maps);
}

Rational ExactLbinDistribution::tail(std::size_t ell) const {
  std::uint64_t maps_at_least = 0;
  for (auto it = maps_by_lbin.lower_bound(ell); it != maps_by_lbin.end(); ++it) {
    maps_at_least += it->second;
  }
  return Rational::reduced(maps_at_least, total_maps);
}

ExactLbinDistribution exact_lbin_distribution(std::size_t u, std::size_t b, const BallSet& balls) {
  if (u == 0 || b == 0) throw std::invalid_argument("exact: dimensions must be >= 1");
  if (u * b > kMaxExactBits) {
    throw SizeGuardError("exact enumeration needs u*b <= " + std::to_string(kMaxExactBits));
  }
  if (balls.universe_dim() != u) throw DimensionError("ball set universe != u");

  std::vector<std::uint64_t> xs;
  xs.reserve(balls.size());
  for (const auto& s : balls.members()) xs.push_back(s.to_uint());

  ExactLbinDistribution dist;
  dist.total_maps = std::uint64_t{1} << (u * b);
  const std::uint64_t row_mask = (std::uint64_t{1} << u) - 1;
  std::vector<std::uint32_t> counts(std::size_t{1} << b, 0);
  std::vector<std::uint64_t> rows(b);
  std::vector<std::uint64_t> labels(xs.size());
  for (std::uint64_t idx = 0; idx < dist.total_maps; ++idx) {
    for (std::size_t i = 0; i < b; ++i) rows[i] = (idx >> (i * u)) & row_mask;
    std::size_t best = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      std::uint64_t y = 0;
      for (std::size_t i = 0; i < b; ++i) {
        y |= static_cast<std::uint64_t>(std::popcount(rows[i] & xs[k]) & 1) << i;
      }
      labels[k] = y;
      best = std::max<std::size_t>(best, ++counts[y]);
    }
    for (std::uint64_t y : labels) counts[y] = 0;
    ++dist.maps_by_lbin[best];
  }
  return dist;
}

Rational exact_expected_lbin(std::size_t u, std::size_t b, const BallSet& balls) {
  return exact_lbin_distribution(u, b, balls).expected();
}

// ------------------------------------------------- structural special cases

SubspaceStructureReport subspace_structure(const LinearMap& map, const BallSet& balls) {
  if (!balls.subspace_basis()) {
    throw PreconditionError("subspace_structure: ball set is not a (affine) subspace");
  }
  require_universe(map, balls);
  const SubspaceBasis& basis = *balls.subspace_basis();
  const LinearMap linear = map.linear_part();

  std::vector<GF2Vector> images;
  images.reserve(basis.dim());
  for (const auto& v : basis.basis()) images.push_back(apply(linear, v));
  const std::size_t image_dim = SubspaceBasis::span_of(map.out_dim(), images).dim();

  SubspaceStructureReport r;
  r.kernel_intersection_dim = basis.dim() - image_dim;
  r.predicted_bin_size = std::size_t{1} << r.kernel_intersection_dim;
  r.predicted_nonempty_bins = std::size_t{1} << image_dim;

  const BinHistogram hist = bin_counts(map, balls);
  r.nonempty_bins = hist.counts.size();
  r.largest = hist.largest();
  r.all_bins_equal = std::all_of(hist.counts.begin(), hist.counts.end(), [&](const auto& kv) {
    return kv.second == r.predicted_bin_size;
  });
  const GF2Vector anchor = apply(map, balls.offset().value_or(GF2Vector(balls.universe_dim())));
  r.anchor_bin_size = hist.count(anchor);
  r.largest_is_anchor_bin = r.largest == r.anchor_bin_size;
  r.bin_count_matches = r.nonempty_bins == r.predicted_nonempty_bins;
  return r;
}

std::uint64_t affine_joint_count(std::size_t u, std::size_t b, const GF2Vector& x1,
                                 const GF2Vector& x2, const GF2Vector& y1, const GF2Vector& y2) {
  if (u * b + b > kMaxExactBits) throw SizeGuardError("affine_joint_count: too many maps");
  if (x1.dim() != u || x2.dim() != u || y1.dim() != b || y2.dim() != b) {
    throw DimensionError("affine_joint_count: dimension mismatch");
  }
  std::uint64_t count = 0;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << b); ++a) {
    const GF2Vector shift = GF2Vector::from_uint(b, a);
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << (u * b)); ++idx) {
      const LinearMap h = LinearMap::from_index(u, b, idx).with_translation(shift);
      if (apply(h, x1) == y1 && apply(h, x2) == y2) ++count;
    }
  }
  return count;
}

PairwiseReport pairwise_independence_exact(std::size_t u, std::size_t b) {
  if (u == 0 || b == 0) throw std::invalid_argument("pairwise: dimensions must be >= 1");
  if (u * b + b > 16) throw SizeGuardError("pairwise exact mode needs u*b + b <= 16");
  const std::uint64_t points = std::uint64_t{1} << u;
  const std::uint64_t pairs = points * (points - 1) / 2;
  const std::uint64_t maps = std::uint64_t{1} << (u * b + b);
  const std::uint64_t cells = std::uint64_t{1} << (2 * b);
  if (pairs == 0) throw PreconditionError("pairwise: universe has fewer than two points");
  if (maps * pairs > (std::uint64_t{1} << 30) || pairs * cells > (std::uint64_t{1} << 26)) {
    throw SizeGuardError("pairwise exact mode: too many map/pair evaluations");
  }

  std::vector<std::uint64_t> table(pairs * cells, 0);
  std::vector<std::uint64_t> hashed(points);
  const std::uint64_t row_mask = points - 1;
  for (std::uint64_t m = 0; m < maps; ++m) {
    const std::uint64_t shift = m >> (u * b);
    for (std::uint64_t x = 0; x < points; ++x) {
      std::uint64_t y = shift;
      for (std::size_t i = 0; i < b; ++i) {
        const std::uint64_t row = (m >> (i * u)) & row_mask;
        y ^= static_cast<std::uint64_t>(std::popcount(row & x) & 1) << i;
      }
      hashed[x] = y;
    }
    std::uint64_t p = 0;
    for (std::uint64_t x1 = 0; x1 < points; ++x1) {
      for (std::uint64_t x2 = x1 + 1; x2 < points; ++x2, ++p) {
        ++table[p * cells + (hashed[x1] << b) + hashed[x2]];
      }
    }
  }

  PairwiseReport r;
  r.exact = true;
  r.u = u;
  r.b = b;
  r.maps_examined = maps;
  r.pairs_checked = pairs;
  r.cells_checked = pairs * cells;
  const std::uint64_t expected = maps / cells;
  for (std::uint64_t c : table) {
    const double dev = std::abs(static_cast<double>(c) - static_cast<double>(expected));
    r.worst = std::max(r.worst, dev);
    if (c != expected) ++r.failures;
  }
  return r;
}

PairwiseReport pairwise_independence_sampled(std::size_t u, std::size_t b, std::size_t pairs,
                                             std::size_t trials, double alpha, Rng& rng) {
  if (u == 0 || b == 0 || pairs == 0 || trials == 0) {
    throw std::invalid_argument("pairwise sampled mode: all parameters must be >= 1");
  }
  if (b > 8) throw SizeGuardError("pairwise sampled mode needs b <= 8 (2^(2b) cells)");
  const std::size_t cells = std::size_t{1} << (2 * b);

  PairwiseReport r;
  r.u = u;
  r.b = b;
  r.worst = 1.0;
  std::vector<std::uint64_t> observed(cells);
  for (std::size_t p = 0; p < pairs; ++p) {
    GF2Vector x1 = random_vector(u, rng);
    GF2Vector x2 = random_vector(u, rng);
    while (x2 == x1) x2 = random_vector(u, rng);
    std::fill(observed.begin(), observed.end(), 0);
    for (std::size_t t = 0; t < trials; ++t) {
      const LinearMap h = sample_uniform_affine(u, b, rng);
      ++observed[(apply_packed(h, x1) << b) | apply_packed(h, x2)];
    }
    const double stat = stats::chi_square_uniform(observed);
    const double pval = stats::chi_square_p_value(stat, cells - 1);
    r.worst = std::min(r.worst, pval);
    if (pval < alpha / static_cast<double>(pairs)) ++r.failures;
    r.maps_examined += trials;
    ++r.pairs_checked;
    r.cells_checked += cells;
  }
  return r;
}

PairwiseReport pairwise_independence_check(std::size_t u, std::size_t b, Rng& rng) {
  try {
    return pairwise_independence_exact(u, b);
  } catch (const SizeGuardError&) {
    return pairwise_independence_sampled(u, b, 32, 20000, 0.001, rng);
  }
}

}  // namespace linhash
