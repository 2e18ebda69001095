/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#ifndef LINSKETCH_KLL_SKETCH_HPP_
#define LINSKETCH_KLL_SKETCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "byte_io.hpp"
#include "random.hpp"

namespace linsketch {

using item = uint64_t;

/// Which half of a sorted compactor survives, counting positions from 1:
/// `odd` keeps the 1st, 3rd, ... items and `even` keeps the 2nd, 4th, ...
enum class parity : uint8_t { even, odd };

namespace detail {

inline std::vector<item> take_alternate(std::span<const item> sorted, parity p) {
  std::vector<item> out;
  out.reserve(sorted.size() / 2);
  for (size_t i = (p == parity::odd ? 0 : 1); i < sorted.size(); i += 2) out.push_back(sorted[i]);
  return out;
}

} // namespace detail

/// Halves a full compactor buffer: sorts it, keeps the items at the positions
/// selected by `p`, and empties the buffer. The caller re-files the returned
/// items one height up at twice the weight.
inline std::vector<item> kll_compact(std::vector<item>& buffer, parity p) {
  if (buffer.size() % 2 != 0) {
    throw std::logic_error("kll_compact: buffer size must be even, got " + std::to_string(buffer.size()));
  }
  std::sort(buffer.begin(), buffer.end());
  auto promoted = detail::take_alternate(buffer, p);
  buffer.clear();
  return promoted;
}

/// Same as above with the parity drawn from one fair coin of `rng`.
inline std::vector<item> kll_compact(std::vector<item>& buffer, splitmix64& rng) {
  if (buffer.size() % 2 != 0) {
    throw std::logic_error("kll_compact: buffer size must be even, got " + std::to_string(buffer.size()));
  }
  return kll_compact(buffer, rng.coin() ? parity::odd : parity::even);
}

/// Capacity of the compactor `depth` levels below the top of the hierarchy:
/// max(ceil(k * c^depth), 2), rounded up to an even number.
inline uint32_t level_capacity(uint32_t k, double c, uint32_t depth) {
  double raw = static_cast<double>(k);
  for (uint32_t i = 0; i < depth && raw > 2.0; ++i) raw *= c;
  // c^depth is inexact in binary; don't let 6.0000000001 round up to 8
  auto cap = static_cast<uint64_t>(std::ceil(raw * (1.0 - 1e-12)));
  cap += cap % 2;
  return static_cast<uint32_t>(std::max<uint64_t>(cap, 2));
}

/// Weighted reservoir of one item standing in for the capacity-2 bottom
/// heights. Offered weights accumulate until they reach 2^height; each offered
/// item ends up as the emitted candidate with probability proportional to its
/// weight.
struct reservoir_sampler {
  uint32_t height = 0;
  uint64_t weight = 0; // in-flight weight, always < 2^height between calls
  item candidate = 0;

  /// Returns true when the target weight is reached; `candidate` is then the
  /// emitted item and the in-flight weight restarts from zero.
  bool offer(item x, uint64_t w, splitmix64& rng) {
    weight += w;
    if (rng.below(weight) < w) candidate = x;
    if (weight == (uint64_t{1} << height)) {
      weight = 0;
      return true;
    }
    return false;
  }

  friend bool operator==(const reservoir_sampler& a, const reservoir_sampler& b) {
    return a.height == b.height && a.weight == b.weight && (a.weight == 0 || a.candidate == b.candidate);
  }
};

struct kll_compaction_event {
  uint32_t height;
  std::span<const item> compacted; // sorted, even length, weight 2^height each
  std::span<const item> promoted;  // weight 2^(height + 1) each
};

/// Non-GK KLL sketch over 64-bit unsigned items.
///
/// Heights 0..H-1; the compactor at height h holds items of implicit weight
/// 2^h and has capacity level_capacity(k, c, H - 1 - h). Bottom heights whose
/// capacity is 2 are replaced by a constant-space sampler that forwards one
/// item of weight 2^s for every 2^s units of input weight (s = sampler height).
/// The sampler's pending candidate is not visible to rank queries until it is
/// emitted.
///
/// With `top_levels` = t > 0 the highest t heights are not materialized:
/// items promoted out of height H - t - 1 are queued for the host structure
/// (see take_promotions) and the host decides when the hierarchy grows.
class kll_sketch {
public:
  static constexpr double default_c = 2.0 / 3.0;
  static constexpr uint32_t min_k = 4;
  static constexpr uint32_t max_k = 1u << 20;
  /// candidate, in-flight weight, sampler height
  static constexpr size_t sampler_words = 3;

  explicit kll_sketch(uint32_t k, uint64_t seed = 0, double c = default_c, uint32_t top_levels = 0)
      : k_(k), c_(c), top_levels_(top_levels), seed_(seed), rng_(seed), height_(top_levels + 1) {
    if (k < min_k || k > max_k) {
      throw std::invalid_argument("k must be in [" + std::to_string(min_k) + ", " + std::to_string(max_k) +
                                  "]: " + std::to_string(k));
    }
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must be in (0, 1): " + std::to_string(c));
    levels_.resize(1);
    compactions_.resize(1, 0);
    recompute_capacities();
  }

  void update(item x) {
    ++n_;
    if (sampler_.height == 0) {
      levels_[0].push_back(x);
    } else {
      offer_sample(x, 1);
    }
    settle();
  }

  /// Sum of the weights of stored items <= q.
  double rank(item q) const {
    uint64_t total = 0;
    for (uint32_t h = sampler_.height; h < levels_.size(); ++h) {
      uint64_t cnt = 0;
      for (item v : levels_[h]) cnt += (v <= q);
      total += cnt << h;
    }
    return static_cast<double>(total);
  }

  /// Total weight of stored items (excludes the sampler's in-flight weight).
  double retained_weight() const {
    uint64_t total = 0;
    for (uint32_t h = sampler_.height; h < levels_.size(); ++h) total += uint64_t{levels_[h].size()} << h;
    return static_cast<double>(total);
  }

  /// 64-bit words retained: one per stored item plus sampler_words.
  size_t space() const {
    size_t words = sampler_words;
    for (const auto& lvl : levels_) words += lvl.size();
    return words;
  }

  size_t num_retained() const {
    size_t cnt = 0;
    for (const auto& lvl : levels_) cnt += lvl.size();
    return cnt;
  }

  uint64_t n() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  uint32_t k() const noexcept { return k_; }
  double c() const noexcept { return c_; }
  uint64_t seed() const noexcept { return seed_; }
  uint32_t top_levels() const noexcept { return top_levels_; }
  /// H, counting heights replaced by the host's top structure.
  uint32_t height() const noexcept { return height_; }
  uint32_t num_levels() const noexcept { return static_cast<uint32_t>(levels_.size()); }
  uint32_t sampler_height() const noexcept { return sampler_.height; }
  uint32_t capacity(uint32_t h) const { return capacities_.at(h); }
  std::span<const item> level(uint32_t h) const { return levels_.at(h); }
  /// m_h: compactions performed at each materialized height.
  const std::vector<uint64_t>& compaction_counts() const noexcept { return compactions_; }

  struct pending_sample {
    item candidate;
    uint64_t weight; // 0 when nothing is in flight
  };
  pending_sample pending() const noexcept { return {sampler_.candidate, sampler_.weight}; }

  /// Calls fn(value, weight) for every stored item.
  template<typename Fn>
  void for_each_weighted(Fn&& fn) const {
    for (uint32_t h = sampler_.height; h < levels_.size(); ++h) {
      for (item v : levels_[h]) fn(v, uint64_t{1} << h);
    }
  }

  void set_compaction_observer(std::function<void(const kll_compaction_event&)> obs) {
    observer_ = std::move(obs);
  }

  struct promotion_batch {
    uint32_t height; // items weigh 2^height
    std::vector<item> items;
  };

  /// Batches promoted out of the highest materialized height since the last
  /// call (top_levels > 0 only), in production order.
  std::vector<promotion_batch> take_promotions() { return std::exchange(promotions_, {}); }

  /// Adds one height to a hierarchy whose top is hosted elsewhere. Existing
  /// capacities shrink and are enforced before returning.
  void grow() {
    if (top_levels_ == 0) throw std::logic_error("grow() is driven internally when top_levels == 0");
    add_height();
    settle();
  }

  void serialize(byte_writer& out) const;
  std::vector<std::byte> serialize() const {
    byte_writer w;
    serialize(w);
    return w.release();
  }
  static kll_sketch deserialize(byte_reader& in);
  static kll_sketch deserialize(std::span<const std::byte> bytes) {
    byte_reader in(bytes);
    auto s = deserialize(in);
    if (in.remaining() != 0) in.fail("trailing bytes after sketch");
    return s;
  }

  friend bool operator==(const kll_sketch& a, const kll_sketch& b) {
    return a.k_ == b.k_ && a.c_ == b.c_ && a.top_levels_ == b.top_levels_ && a.seed_ == b.seed_ &&
           a.rng_ == b.rng_ && a.n_ == b.n_ && a.height_ == b.height_ && a.levels_ == b.levels_ &&
           a.sampler_ == b.sampler_;
  }

  static constexpr uint8_t magic[4] = {'L', 'Q', 'S', 'K'};
  static constexpr uint8_t format_version = 1;

private:
  void offer_sample(item x, uint64_t weight) {
    if (sampler_.offer(x, weight, rng_)) levels_[sampler_.height].push_back(sampler_.candidate);
  }

  // Compact until every materialized level is below capacity.
  void settle() {
    bool again = true;
    while (again) {
      again = false;
      for (uint32_t h = sampler_.height; h < levels_.size(); ++h) {
        if (levels_[h].size() >= capacities_[h]) {
          compact_level(h);
          again = true;
        }
      }
    }
  }

  std::vector<item> halve(uint32_t h) {
    auto& buf = levels_[h];
    std::optional<item> held;
    if (buf.size() % 2 != 0) {
      held = buf.back();
      buf.pop_back();
    }
    std::sort(buf.begin(), buf.end());
    auto promoted = detail::take_alternate(buf, rng_.coin() ? parity::odd : parity::even);
    ++compactions_[h];
    if (observer_) observer_(kll_compaction_event{h, buf, promoted});
    buf.clear();
    if (held) buf.push_back(*held);
    return promoted;
  }

  void compact_level(uint32_t h) {
    auto promoted = halve(h);
    if (h + 1 < levels_.size()) {
      levels_[h + 1].insert(levels_[h + 1].end(), promoted.begin(), promoted.end());
    } else if (top_levels_ == 0) {
      add_height();
      levels_[h + 1] = std::move(promoted);
    } else {
      promotions_.push_back({h + 1, std::move(promoted)});
    }
  }

  void add_height() {
    ++height_;
    levels_.emplace_back();
    compactions_.push_back(0);
    recompute_capacities();
    while (sampler_.height + 1 < levels_.size() && capacities_[sampler_.height] == 2) collapse_into_sampler();
  }

  // The lowest materialized level has shrunk to capacity 2: fold it into the
  // sampler. Pairs are compacted upward; a leftover item joins the sampler's
  // reservoir with its weight, which stays below the doubled target.
  void collapse_into_sampler() {
    const uint32_t s = sampler_.height;
    auto& buf = levels_[s];
    std::optional<item> held;
    if (buf.size() % 2 != 0) {
      held = buf.back();
      buf.pop_back();
    }
    if (!buf.empty()) {
      auto promoted = halve(s);
      levels_[s + 1].insert(levels_[s + 1].end(), promoted.begin(), promoted.end());
    }
    sampler_.height = s + 1;
    if (held) offer_sample(*held, uint64_t{1} << s);
  }

  void recompute_capacities() {
    capacities_.resize(levels_.size());
    for (uint32_t h = 0; h < levels_.size(); ++h) capacities_[h] = level_capacity(k_, c_, height_ - 1 - h);
  }

  uint32_t k_;
  double c_;
  uint32_t top_levels_;
  uint64_t seed_;
  splitmix64 rng_;
  uint64_t n_ = 0;
  uint32_t height_;
  std::vector<std::vector<item>> levels_;
  std::vector<uint32_t> capacities_;
  std::vector<uint64_t> compactions_;
  reservoir_sampler sampler_;
  std::vector<promotion_batch> promotions_;
  std::function<void(const kll_compaction_event&)> observer_;
};

inline void kll_sketch::serialize(byte_writer& out) const {
  for (uint8_t b : magic) out.u8(b);
  out.u8(format_version);
  out.u8(static_cast<uint8_t>(top_levels_));
  out.u16(0);
  out.u32(k_);
  out.f64(c_);
  out.u64(seed_);
  out.u64(rng_.state());
  out.u64(n_);
  out.u32(height_);
  out.u32(sampler_.height);
  out.u64(sampler_.weight);
  out.u64(sampler_.weight == 0 ? 0 : sampler_.candidate);
  out.u32(static_cast<uint32_t>(levels_.size()));
  for (const auto& lvl : levels_) {
    out.u32(static_cast<uint32_t>(lvl.size()));
    for (item v : lvl) out.u64(v);
  }
}

inline kll_sketch kll_sketch::deserialize(byte_reader& in) {
  for (uint8_t b : magic) {
    if (in.u8() != b) in.fail("bad magic");
  }
  if (uint8_t v = in.u8(); v != format_version) in.fail("unsupported format version " + std::to_string(v));
  const uint8_t t = in.u8();
  if (in.u16() != 0) in.fail("reserved field must be zero");
  const uint32_t k = in.u32();
  const double c = in.f64();
  const uint64_t seed = in.u64();
  kll_sketch s = [&] {
    try {
      return kll_sketch(k, seed, c, t);
    } catch (const std::invalid_argument& e) {
      in.fail(e.what());
    }
  }();
  s.rng_.set_state(in.u64());
  s.n_ = in.u64();
  s.height_ = in.u32();
  s.sampler_.height = in.u32();
  s.sampler_.weight = in.u64();
  s.sampler_.candidate = in.u64();
  const uint32_t num_levels = in.u32();
  if (s.height_ < uint32_t{t} + 1 || num_levels != s.height_ - t) in.fail("inconsistent hierarchy height");
  if (s.sampler_.height >= num_levels || s.sampler_.weight >= (uint64_t{1} << s.sampler_.height)) {
    in.fail("inconsistent sampler state");
  }
  s.levels_.assign(num_levels, {});
  s.compactions_.assign(num_levels, 0);
  s.recompute_capacities();
  for (uint32_t h = 0; h < num_levels; ++h) {
    const uint32_t cnt = in.u32();
    if (cnt >= s.capacities_[h] || (h < s.sampler_.height && cnt != 0)) in.fail("level size out of range");
    s.levels_[h].resize(cnt);
    for (auto& v : s.levels_[h]) v = in.u64();
  }
  return s;
}

} // namespace linsketch

#endif // LINSKETCH_KLL_SKETCH_HPP_
