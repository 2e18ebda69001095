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

#ifndef LINSKETCH_LINEAR_SKETCH_HPP_
#define LINSKETCH_LINEAR_SKETCH_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "byte_io.hpp"
#include "kll_sketch.hpp"
#include "linear_compactor.hpp"

namespace linsketch {

class empty_sketch_error : public std::runtime_error {
public:
  empty_sketch_error() : std::runtime_error("operation undefined for an empty sketch") {}
};

struct sketch_params {
  uint32_t k = 200;
  double c = kll_sketch::default_c;
  uint32_t t = 0;
  uint64_t seed = 0;

  static constexpr uint32_t max_t = 3;

  void validate() const {
    if (k < kll_sketch::min_k) throw std::invalid_argument("k must be >= 4: " + std::to_string(k));
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must be in (0, 1)");
    if (t > max_t) throw std::invalid_argument("t must be in [0, 3]: " + std::to_string(t));
    if ((uint64_t{t} * k) % 2 != 0) throw std::invalid_argument("t * k must be even");
  }

  /// "kll" for t = 0, otherwise "linear-t{t}".
  std::string algorithm_id() const { return t == 0 ? "kll" : "linear-t" + std::to_string(t); }
};

struct top_compaction_event {
  const linear_compaction_event& compaction;
  uint32_t height;      // H when the compaction ran
  double intake_weight; // 2^(H - t), the weight of points delivered at this height
};

class rank_view;

/// KLL hierarchy whose top t heights are replaced by one linear compactor of
/// capacity t * k. With t = 0 this is exactly kll_sketch.
///
/// The hierarchy grows when the linear compactor's total weight reaches
/// k * 2^(H - t) * (2^t - 1), the weight that t full KLL levels of capacity k
/// would represent; growing inserts a KLL level below the linear compactor,
/// which doubles the intake weight. Weights already stored are untouched.
class linear_sketch {
public:
  explicit linear_sketch(const sketch_params& p)
      : params_(checked(p)), kll_(p.k, p.seed, p.c, p.t), top_(p.t * p.k) {}

  void update(item x) {
    kll_.update(x);
    if (params_.t != 0) drain();
  }

  double rank(item q) const { return kll_.rank(q) + top_.rank(q); }

  /// Smallest stored value whose rank reaches phi * n; the largest stored
  /// value when no stored value does.
  item quantile(double phi) const;

  /// 64-bit words: one per KLL item, two per linear-compactor point, plus
  /// the sampler's constant.
  size_t space() const { return kll_.space() + 2 * top_.size(); }

  uint64_t n() const noexcept { return kll_.n(); }
  bool empty() const noexcept { return kll_.empty(); }
  double retained_weight() const { return kll_.retained_weight() + top_.total_weight(); }
  const sketch_params& params() const noexcept { return params_; }
  std::string algorithm_id() const { return params_.algorithm_id(); }
  const kll_sketch& kll() const noexcept { return kll_; }
  const linear_compactor& top() const noexcept { return top_; }
  uint32_t height() const noexcept { return kll_.height(); }
  double intake_weight() const { return static_cast<double>(uint64_t{1} << (kll_.height() - params_.t)); }
  double growth_threshold() const {
    return static_cast<double>(params_.k) * intake_weight() * static_cast<double>((uint64_t{1} << params_.t) - 1);
  }

  rank_view view() const;

  void set_top_observer(std::function<void(const top_compaction_event&)> obs) { top_observer_ = std::move(obs); }
  void set_kll_observer(std::function<void(const kll_compaction_event&)> obs) {
    kll_.set_compaction_observer(std::move(obs));
  }

  /// The kll_sketch blob, followed for t > 0 by the linear compactor section.
  std::vector<std::byte> serialize() const {
    byte_writer w;
    kll_.serialize(w);
    if (params_.t != 0) top_.serialize(w);
    return w.release();
  }

  static linear_sketch deserialize(std::span<const std::byte> bytes) {
    byte_reader in(bytes);
    kll_sketch kll = kll_sketch::deserialize(in);
    sketch_params p{kll.k(), kll.c(), kll.top_levels(), kll.seed()};
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      in.fail(e.what());
    }
    linear_compactor top(p.t * p.k);
    if (p.t != 0) {
      top = linear_compactor::deserialize(in);
      if (top.capacity() != p.t * p.k) in.fail("linear compactor capacity does not match t * k");
    }
    if (in.remaining() != 0) in.fail("trailing bytes after sketch");
    return linear_sketch(p, std::move(kll), std::move(top));
  }

  friend bool operator==(const linear_sketch& a, const linear_sketch& b) {
    return a.kll_ == b.kll_ && a.top_ == b.top_;
  }

private:
  linear_sketch(const sketch_params& p, kll_sketch kll, linear_compactor top)
      : params_(p), kll_(std::move(kll)), top_(std::move(top)) {}

  static const sketch_params& checked(const sketch_params& p) {
    p.validate();
    return p;
  }

  void drain() {
    for (;;) {
      auto batches = kll_.take_promotions();
      if (batches.empty()) return;
      for (auto& batch : batches) {
        const double w = static_cast<double>(uint64_t{1} << batch.height);
        std::vector<weighted_point> pts(batch.items.size());
        for (size_t i = 0; i < pts.size(); ++i) pts[i] = {batch.items[i], w};
        if (top_observer_) {
          top_.set_compaction_observer([this](const linear_compaction_event& e) {
            top_observer_(top_compaction_event{e, kll_.height(), intake_weight()});
          });
        }
        top_.add(pts);
        top_.set_compaction_observer(nullptr);
        while (top_.total_weight() >= growth_threshold()) kll_.grow();
      }
    }
  }

  sketch_params params_;
  kll_sketch kll_;
  linear_compactor top_;
  std::function<void(const top_compaction_event&)> top_observer_;
};

/// Immutable snapshot answering the same ranks as the sketch it was taken
/// from, in O(log size) per query.
class rank_view {
public:
  explicit rank_view(const linear_sketch& s) : top_pts_(s.top().points().begin(), s.top().points().end()),
                                               top_cum_(s.top().cumulative().begin(), s.top().cumulative().end()) {
    std::vector<std::pair<item, uint64_t>> items;
    items.reserve(s.kll().num_retained());
    s.kll().for_each_weighted([&](item v, uint64_t w) { items.emplace_back(v, w); });
    std::sort(items.begin(), items.end());
    uint64_t acc = 0;
    for (const auto& [v, w] : items) {
      acc += w;
      if (!values_.empty() && values_.back() == v) {
        cum_.back() = acc;
      } else {
        values_.push_back(v);
        cum_.push_back(acc);
      }
    }
  }

  double rank(item q) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), q);
    const uint64_t kll_part = it == values_.begin() ? 0 : cum_[static_cast<size_t>(it - values_.begin()) - 1];
    return static_cast<double>(kll_part) + detail::interpolated_rank(top_pts_, top_cum_, q);
  }

  /// Sorted distinct values stored anywhere in the sketch.
  std::vector<item> stored_values() const {
    std::vector<item> out(values_);
    for (const auto& p : top_pts_) out.push_back(p.y);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

private:
  std::vector<item> values_;
  std::vector<uint64_t> cum_;
  std::vector<weighted_point> top_pts_;
  std::vector<double> top_cum_;
};

inline rank_view linear_sketch::view() const { return rank_view(*this); }

inline item linear_sketch::quantile(double phi) const {
  if (!(phi >= 0.0 && phi <= 1.0)) throw std::invalid_argument("phi must be in [0, 1]");
  if (empty()) throw empty_sketch_error();
  const rank_view v = view();
  const auto values = v.stored_values();
  if (values.empty()) return kll_.pending().candidate;
  const double target = phi * static_cast<double>(n());
  auto it = std::partition_point(values.begin(), values.end(), [&](item x) { return v.rank(x) < target; });
  return it == values.end() ? values.back() : *it;
}

} // namespace linsketch

#endif // LINSKETCH_LINEAR_SKETCH_HPP_
