#include <gtest/gtest.h>

#include <map>
#include <string>

#include "linhash/ballsbins.hpp"
#include "linhash/errors.hpp"
#include "linhash/hashtable.hpp"

namespace linhash {
namespace {

TEST(LinearHashTable, BasicMapSemantics) {
  LinearHashTable<std::string> t(16, 2, 1);
  EXPECT_TRUE(t.empty());
  const GF2Vector k = GF2Vector::from_uint(16, 77);
  EXPECT_FALSE(t.insert(k, "a").has_value());
  EXPECT_EQ(t.insert(k, "b"), std::optional<std::string>("a"));
  EXPECT_EQ(t.get(k), std::optional<std::string>("b"));
  EXPECT_TRUE(t.contains(k));
  EXPECT_EQ(t.remove(k), std::optional<std::string>("b"));
  EXPECT_FALSE(t.remove(k).has_value());
  EXPECT_EQ(t.size(), 0u);
  EXPECT_THROW(t.insert(GF2Vector(8), "x"), DimensionError);
  EXPECT_THROW(LinearHashTable<int>(8, 0, 1), SizeGuardError);
}

TEST(LinearHashTable, GrowsAtLoadFactorOne) {
  LinearHashTable<int> t(20, 1, 5);
  for (int i = 0; i < 2; ++i) t.insert(GF2Vector::from_uint(20, i), i);
  EXPECT_EQ(t.bucket_bits(), 1u);
  t.insert(GF2Vector::from_uint(20, 2), 2);
  EXPECT_EQ(t.bucket_bits(), 2u);
  EXPECT_EQ(t.resizes(), 1u);
  for (int i = 3; i < 1000; ++i) t.insert(GF2Vector::from_uint(20, i), i);
  EXPECT_EQ(t.bucket_bits(), 10u);
  EXPECT_LE(t.size(), t.bucket_count());
  EXPECT_TRUE(t.audit());
}

TEST(LinearHashTable, ChainsKeepInsertionOrder) {
  LinearHashTable<int> t(8, 1, 2, false);
  const GF2Vector partner = kernel_basis(t.hash()).basis().front();
  t.insert(partner, 1);
  t.insert(GF2Vector(8), 2);
  const auto& chain = t.chain(0);
  ASSERT_EQ(chain.size(), 2u);
  EXPECT_EQ(chain[0].key, partner);
  EXPECT_EQ(chain[1].key, GF2Vector(8));
}

TEST(LinearHashTable, EquivalentToReferenceMap) {
  LinearHashTable<std::uint64_t> t(24, 3, 9);
  std::map<std::uint64_t, std::uint64_t> ref;
  Rng rng = make_substream(9, 1);
  for (int op = 0; op < 100000; ++op) {
    const std::uint64_t key = uniform_below(rng, 4096);
    const GF2Vector k = GF2Vector::from_uint(24, key);
    switch (uniform_below(rng, 3)) {
      case 0: {
        const std::uint64_t value = rng();
        auto it = ref.find(key);
        const std::optional<std::uint64_t> expected =
            it == ref.end() ? std::nullopt : std::optional(it->second);
        ASSERT_EQ(t.insert(k, value), expected);
        ref[key] = value;
        break;
      }
      case 1: {
        auto it = ref.find(key);
        ASSERT_EQ(t.get(k), it == ref.end() ? std::nullopt : std::optional(it->second));
        break;
      }
      default: {
        auto it = ref.find(key);
        const std::optional<std::uint64_t> expected =
            it == ref.end() ? std::nullopt : std::optional(it->second);
        ASSERT_EQ(t.remove(k), expected);
        ref.erase(key);
      }
    }
    ASSERT_EQ(t.size(), ref.size());
    if (op % 1000 == 999) {
      ASSERT_TRUE(t.audit());
      std::vector<GF2Vector> members;
      for (const auto& [key_bits, value] : ref) members.push_back(GF2Vector::from_uint(24, key_bits));
      if (!members.empty()) {
        const BallSet keys = BallSet::from_members(24, members);
        ASSERT_EQ(t.stats().max_chain, largest_bin(t.hash(), keys));
      }
    }
  }
}

TEST(LinearHashTable, StatsAreConsistent) {
  LinearHashTable<int> t(32, 10, 3);
  Rng rng = make_substream(3, 7);
  const BallSet keys = generate_set(SetKind::kRandom, 32, 1000, rng);
  int i = 0;
  for (const auto& k : keys.members()) t.insert(k, i++);
  const HashTableStats s = t.stats();
  std::size_t total = 0;
  for (std::size_t b = 0; b < t.bucket_count(); ++b) total += t.chain(b).size();
  EXPECT_EQ(s.size, total);
  EXPECT_EQ(s.buckets, std::size_t{1} << s.bucket_bits);
  EXPECT_NEAR(s.mean_probes_miss, 1000.0 / 1024.0, 1e-12);
  EXPECT_GE(s.mean_probes_hit, 1.0);
  EXPECT_EQ(s.max_chain, largest_bin(t.hash(), keys));

  LinearHashTable<int> empty(32, 4, 1);
  const HashTableStats z = empty.stats();
  EXPECT_EQ(z.size, 0u);
  EXPECT_EQ(z.max_chain, 0u);
  EXPECT_EQ(z.mean_probes_hit, 0.0);
  EXPECT_EQ(z.resizes, 0u);
}

TEST(LinearHashTable, SubspaceKeysFollowKernelStructure) {
  Rng rng = make_substream(4, 0);
  for (int k = 0; k < 50; ++k) {
    const BallSet keys = generate_set(SetKind::kSubspace, 20, 6, rng);
    LinearHashTable<int> t(20, 6, 100 + k, false);
    for (const auto& key : keys.members()) t.insert(key, 0);
    const SubspaceStructureReport r = subspace_structure(t.hash(), keys);
    EXPECT_EQ(t.stats().max_chain, r.predicted_bin_size);
    EXPECT_EQ(t.chain(0).size(), r.predicted_bin_size);
  }
}

}  // namespace
}  // namespace linhash
