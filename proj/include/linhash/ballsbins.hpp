#pragma once

// Balls-and-bins experiments for linear maps GF(2)^u -> GF(2)^b.
//
// A ball set S is fixed per experiment; each trial draws a fresh uniform map T
// and records lbin(T, S), the size of the largest preimage T^-1(y) ∩ S.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linhash/gf2.hpp"
#include "linhash/rng.hpp"

namespace linhash {

enum class SetKind { kInterval, kRandom, kSubspace, kAffineSubspace, kCluster };

std::string_view to_string(SetKind kind);
// Accepts interval, random, subspace, affine (or affine_subspace), cluster.
SetKind parse_set_kind(std::string_view name);
// Subspace kinds are parameterised by dimension, the others by cardinality.
bool takes_dimension(SetKind kind);

struct SetDescriptor {
  SetKind kind = SetKind::kInterval;
  // Cardinality, or dimension for the subspace kinds.
  std::size_t param = 0;
};

class BallSet {
 public:
  // Deduplicates `members` (keeping first occurrences). Throws on an empty set
  // or a member of the wrong dimension.
  static BallSet from_members(std::size_t universe_dim, std::vector<GF2Vector> members,
                              SetDescriptor descriptor = {});
  // offset + span(basis), enumerated in coefficient order.
  static BallSet from_subspace(SubspaceBasis basis, std::optional<GF2Vector> offset = std::nullopt);

  std::size_t universe_dim() const { return universe_dim_; }
  std::size_t size() const { return members_.size(); }
  const std::vector<GF2Vector>& members() const { return members_; }
  const SetDescriptor& descriptor() const { return descriptor_; }
  // Present only for sets built as (affine) subspaces.
  const std::optional<SubspaceBasis>& subspace_basis() const { return basis_; }
  const std::optional<GF2Vector>& offset() const { return offset_; }

 private:
  BallSet() = default;

  std::size_t universe_dim_ = 0;
  std::vector<GF2Vector> members_;
  SetDescriptor descriptor_;
  std::optional<SubspaceBasis> basis_;
  std::optional<GF2Vector> offset_;
};

// interval: the first `param` vectors in counting order.
// random: `param` distinct uniform vectors.
// subspace: span of `param` random independent vectors.
// affine: a uniform coset of such a span.
// cluster: a random subspace of dimension floor(log2(param)) - 1 (0 when
//   param < 4), topped up with distinct uniform vectors to `param` members.
// Throws std::invalid_argument when the size exceeds 2^u or the dimension exceeds u.
BallSet generate_set(SetKind kind, std::size_t u, std::size_t param, Rng& rng);

// counts[y] = |T^-1(y) ∩ S| for every occupied label y.
struct BinHistogram {
  std::size_t bin_dim = 0;
  std::map<GF2Vector, std::size_t> counts;

  std::size_t total() const;
  std::size_t largest() const;
  std::size_t count(const GF2Vector& label) const;
};

BinHistogram bin_counts(const LinearMap& map, const BallSet& balls);
std::size_t largest_bin(const LinearMap& map, const BallSet& balls);

// Some bin holds at least `ell` balls.
bool event_e1(const BallSet& balls, const LinearMap& map, std::size_t ell);

// Some fiber T1^-1(y) lies entirely inside T0(S). Evaluated through the
// equivalent test T1(GF(2)^f \ T0(S)) != GF(2)^b. Refuses f > 24.
bool event_e2(const BallSet& balls, const LinearMap& t0, const LinearMap& t1);
// Same event, by checking every fiber point by point.
bool event_e2_direct(const BallSet& balls, const LinearMap& t0, const LinearMap& t1);

inline constexpr std::size_t kMaxE2Dim = 24;

// A heavy bin of T = T1 o T0 together with the sets the E1 -> E2 argument uses.
struct ImplicationWitness {
  GF2Vector label;                     // y
  GF2Vector preimage_offset;           // U_A = preimage_offset + Ker(T)
  SubspaceBasis preimage_directions;   // Ker(T)
  std::vector<GF2Vector> balls;        // S_A = S ∩ U_A
  std::vector<GF2Vector> fiber;        // F_A = T1^-1(y)
  bool fiber_covered;                  // T0(S_A) ⊇ F_A
};

struct ImplicationReport {
  bool e1 = false;
  bool e2 = false;
  std::vector<ImplicationWitness> witnesses;
  // Witnesses whose fiber is covered although E2 is false.
  std::size_t violations = 0;
  bool holds() const { return violations == 0; }
};

ImplicationReport check_e1_e2_implication(const BallSet& balls, const LinearMap& t0,
                                          const LinearMap& t1, std::size_t ell);

// Random tiny (S, T0, T1) triple with u <= max_u, b <= f <= max_f, b <= max_b,
// f <= u, T1 surjective.
struct SmallInstance {
  BallSet balls;
  LinearMap t0;
  LinearMap t1;
};
SmallInstance sample_small_instance(Rng& rng, std::size_t max_u, std::size_t max_f,
                                    std::size_t max_b);

// ------------------------------------------------------------- Monte Carlo

struct ExperimentConfig {
  std::size_t u = 0;
  std::size_t b = 0;
  SetDescriptor set;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> thresholds;
  unsigned jobs = 1;
};

struct TailEstimate {
  std::size_t threshold;
  std::uint64_t hits;
  double freq;
  double ci_lo;
  double ci_hi;
};

struct TrialSummary {
  ExperimentConfig config;
  std::size_t set_size = 0;
  std::vector<std::size_t> lbins;  // indexed by trial
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
  std::vector<TailEstimate> tails;
  std::string rng_algorithm;
};

// The experiment's ball set, drawn from a substream reserved for it.
BallSet experiment_set(const ExperimentConfig& config);

// Runs config.trials trials on `balls`; trial i draws T from substream i of the
// master seed, so the result does not depend on config.jobs.
TrialSummary run_trials(const ExperimentConfig& config, const BallSet& balls);
TrialSummary simulate(const ExperimentConfig& config);
// simulate() with at least one threshold required.
TrialSummary estimate_tail(const ExperimentConfig& config);

inline constexpr std::uint64_t kSetStream = ~std::uint64_t{0};

// ------------------------------------------------------------ exact oracles

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational reduced(std::uint64_t num, std::uint64_t den);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

// Number of linear maps u -> b attaining each lbin value.
struct ExactLbinDistribution {
  std::uint64_t total_maps = 0;
  std::map<std::size_t, std::uint64_t> maps_by_lbin;

  Rational expected() const;
  // P[lbin >= ell].
  Rational tail(std::size_t ell) const;
};

// Enumerates all 2^(u*b) matrices. Refuses u*b > 22.
ExactLbinDistribution exact_lbin_distribution(std::size_t u, std::size_t b, const BallSet& balls);
Rational exact_expected_lbin(std::size_t u, std::size_t b, const BallSet& balls);

inline constexpr std::size_t kMaxExactBits = 22;

// ------------------------------------------------- structural special cases

// For S = v0 + span(B): every non-empty bin is a coset of K = span(B) ∩ Ker(T),
// so all of them hold exactly 2^dim(K) balls.
struct SubspaceStructureReport {
  std::size_t kernel_intersection_dim = 0;
  std::size_t predicted_bin_size = 0;
  std::size_t nonempty_bins = 0;
  std::size_t predicted_nonempty_bins = 0;
  std::size_t anchor_bin_size = 0;  // bin of T(v0); label 0 for linear T and linear S
  std::size_t largest = 0;
  bool all_bins_equal = false;
  bool largest_is_anchor_bin = false;
  bool bin_count_matches = false;
  bool holds() const { return all_bins_equal && largest_is_anchor_bin && bin_count_matches; }
};

// Throws PreconditionError unless `balls` carries a subspace basis.
SubspaceStructureReport subspace_structure(const LinearMap& map, const BallSet& balls);

struct PairwiseReport {
  bool exact = false;
  std::size_t u = 0;
  std::size_t b = 0;
  std::uint64_t maps_examined = 0;
  std::uint64_t pairs_checked = 0;
  std::uint64_t cells_checked = 0;
  std::uint64_t failures = 0;
  // Exact mode: largest |count - expected|; sampled mode: smallest per-pair
  // chi-square p-value.
  double worst = 0.0;
  bool holds() const { return failures == 0; }
};

// Number of affine maps h(x) = Ax + a (u -> b) with h(x1) = y1 and h(x2) = y2.
std::uint64_t affine_joint_count(std::size_t u, std::size_t b, const GF2Vector& x1,
                                 const GF2Vector& x2, const GF2Vector& y1, const GF2Vector& y2);

// Enumerates all 2^(u*b + b) affine maps and checks that every distinct pair
// (x1, x2) lands on every (y1, y2) in exactly 2^(u*b - b) of them. Refuses
// u*b + b > 16 or more than 2^30 map-pair evaluations.
PairwiseReport pairwise_independence_exact(std::size_t u, std::size_t b);

// Samples `pairs` random distinct pairs and `trials` affine maps per pair and
// applies a chi-square test (Bonferroni-corrected level `alpha`) to each pair's
// 2^(2b) joint outcomes.
PairwiseReport pairwise_independence_sampled(std::size_t u, std::size_t b, std::size_t pairs,
                                             std::size_t trials, double alpha, Rng& rng);

// Exact mode when it fits the guard, sampled otherwise.
PairwiseReport pairwise_independence_check(std::size_t u, std::size_t b, Rng& rng);

}  // namespace linhash
