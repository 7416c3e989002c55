#pragma once

// Separate-chaining hash table keyed by u-bit vectors, hashed by a uniformly
// drawn affine map GF(2)^u -> GF(2)^b.
//
// The load factor never exceeds 1: inserting a new key into a full table first
// grows b by one, draws a fresh map and rehashes. A fresh map per size keeps the
// "uniform map, n <= 2^b keys" setting under which the largest chain is O(log n)
// in expectation. Chains keep insertion order.
//
// Single writer. Lookups may run concurrently with each other between writes;
// their probe counters are relaxed atomics.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linhash/errors.hpp"
#include "linhash/gf2.hpp"
#include "linhash/rng.hpp"

namespace linhash {

struct HashTableStats {
  std::size_t size = 0;
  std::size_t bucket_bits = 0;
  std::size_t buckets = 0;
  std::size_t max_chain = 0;
  // Average probes to find a stored key / to miss in a uniformly chosen bucket,
  // computed from the current chain layout.
  double mean_probes_hit = 0.0;
  double mean_probes_miss = 0.0;
  std::size_t resizes = 0;
  // Counters accumulated by get/contains/remove since construction.
  std::uint64_t lookups = 0;
  std::uint64_t probes = 0;
};

inline constexpr std::size_t kMaxBucketBits = 28;

template <typename Value>
class LinearHashTable {
 public:
  struct Entry {
    GF2Vector key;
    Value value;
  };

  // With affine = false the translation is omitted and key 0 always lands in
  // bucket 0.
  LinearHashTable(std::size_t key_dim, std::size_t initial_bits, std::uint64_t seed,
                  bool affine = true)
      : key_dim_(key_dim),
        bits_(initial_bits),
        affine_(affine),
        rng_(make_substream(seed, 0)),
        hash_(draw_hash(key_dim, initial_bits)),
        buckets_(bucket_count_checked(initial_bits)) {}

  LinearHashTable(const LinearHashTable&) = delete;
  LinearHashTable& operator=(const LinearHashTable&) = delete;

  std::size_t key_dim() const { return key_dim_; }
  std::size_t bucket_bits() const { return bits_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const LinearMap& hash() const { return hash_; }
  std::size_t resizes() const { return resizes_; }
  const std::vector<Entry>& chain(std::size_t bucket) const { return buckets_.at(bucket); }

  std::size_t bucket_of(const GF2Vector& key) const {
    check_key(key);
    return static_cast<std::size_t>(apply_packed(hash_, key));
  }

  // Returns the previous value when the key was already present.
  std::optional<Value> insert(const GF2Vector& key, Value value) {
    check_key(key);
    for (auto& e : buckets_[bucket_of(key)]) {
      if (e.key == key) return std::exchange(e.value, std::move(value));
    }
    if (size_ + 1 > buckets_.size()) grow();
    buckets_[bucket_of(key)].push_back(Entry{key, std::move(value)});
    ++size_;
    return std::nullopt;
  }

  std::optional<Value> get(const GF2Vector& key) const {
    const Entry* e = locate(key);
    if (e == nullptr) return std::nullopt;
    return e->value;
  }

  bool contains(const GF2Vector& key) const { return get(key).has_value(); }

  std::optional<Value> remove(const GF2Vector& key) {
    check_key(key);
    auto& chain = buckets_[bucket_of(key)];
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (chain[i].key == key) {
        count_probe(i + 1);
        Value out = std::move(chain[i].value);
        chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(i));
        --size_;
        return out;
      }
    }
    count_probe(chain.size());
    return std::nullopt;
  }

  std::vector<GF2Vector> keys() const {
    std::vector<GF2Vector> out;
    out.reserve(size_);
    for (const auto& chain : buckets_) {
      for (const auto& e : chain) out.push_back(e.key);
    }
    return out;
  }

  HashTableStats stats() const {
    HashTableStats s;
    s.size = size_;
    s.bucket_bits = bits_;
    s.buckets = buckets_.size();
    s.resizes = resizes_;
    s.lookups = lookups_.load(std::memory_order_relaxed);
    s.probes = probes_.load(std::memory_order_relaxed);
    std::size_t position_sum = 0;
    for (const auto& chain : buckets_) {
      s.max_chain = std::max(s.max_chain, chain.size());
      position_sum += chain.size() * (chain.size() + 1) / 2;
    }
    if (size_ > 0) {
      s.mean_probes_hit = static_cast<double>(position_sum) / static_cast<double>(size_);
      s.mean_probes_miss = static_cast<double>(size_) / static_cast<double>(buckets_.size());
    }
    return s;
  }

  // Every entry sits in the bucket its key hashes to, keys are unique, the
  // size matches the chains and the load factor is at most 1.
  bool audit() const {
    std::size_t total = 0;
    for (std::size_t bucket = 0; bucket < buckets_.size(); ++bucket) {
      const auto& chain = buckets_[bucket];
      for (std::size_t i = 0; i < chain.size(); ++i) {
        if (bucket_of(chain[i].key) != bucket) return false;
        for (std::size_t j = 0; j < i; ++j) {
          if (chain[j].key == chain[i].key) return false;
        }
      }
      total += chain.size();
    }
    return total == size_ && size_ <= buckets_.size();
  }

 private:
  static std::size_t bucket_count_checked(std::size_t bits) {
    if (bits < 1 || bits > kMaxBucketBits) {
      throw SizeGuardError("bucket bits must lie in [1, " + std::to_string(kMaxBucketBits) + "]");
    }
    return std::size_t{1} << bits;
  }

  LinearMap draw_hash(std::size_t key_dim, std::size_t bits) {
    bucket_count_checked(bits);
    return affine_ ? sample_uniform_affine(key_dim, bits, rng_)
                   : sample_uniform_linear(key_dim, bits, rng_);
  }

  void check_key(const GF2Vector& key) const {
    if (key.dim() != key_dim_) {
      throw DimensionError("key dimension " + std::to_string(key.dim()) + " != table key dimension " +
                           std::to_string(key_dim_));
    }
  }

  void count_probe(std::size_t n) const {
    lookups_.fetch_add(1, std::memory_order_relaxed);
    probes_.fetch_add(n, std::memory_order_relaxed);
  }

  const Entry* locate(const GF2Vector& key) const {
    check_key(key);
    const auto& chain = buckets_[bucket_of(key)];
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (chain[i].key == key) {
        count_probe(i + 1);
        return &chain[i];
      }
    }
    count_probe(chain.size());
    return nullptr;
  }

  void grow() {
    const std::size_t bits = bits_ + 1;
    LinearMap next = draw_hash(key_dim_, bits);
    std::vector<std::vector<Entry>> moved(std::size_t{1} << bits);
    for (auto& chain : buckets_) {
      for (auto& e : chain) moved[apply_packed(next, e.key)].push_back(std::move(e));
    }
    bits_ = bits;
    hash_ = std::move(next);
    buckets_ = std::move(moved);
    ++resizes_;
  }

  std::size_t key_dim_;
  std::size_t bits_;
  bool affine_;
  Rng rng_;
  LinearMap hash_;
  std::vector<std::vector<Entry>> buckets_;
  std::size_t size_ = 0;
  std::size_t resizes_ = 0;
  mutable std::atomic<std::uint64_t> lookups_{0};
  mutable std::atomic<std::uint64_t> probes_{0};
};

}  // namespace linhash
