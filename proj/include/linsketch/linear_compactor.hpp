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

#ifndef LINSKETCH_LINEAR_COMPACTOR_HPP_
#define LINSKETCH_LINEAR_COMPACTOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "byte_io.hpp"
#include "kll_sketch.hpp"

namespace linsketch {

struct weighted_point {
  item y;
  double w;
  friend bool operator==(const weighted_point&, const weighted_point&) = default;
};

namespace detail {

inline double gap(item lo, item hi) { return static_cast<double>(hi - lo); }

// Rank of q under the piecewise-linear interpolation of `pts` (sorted, unique
// y) with prefix sums `cum`. The first point is a point mass.
inline double interpolated_rank(std::span<const weighted_point> pts, std::span<const double> cum, item q) {
  if (pts.empty() || q < pts.front().y) return 0.0;
  if (q >= pts.back().y) return cum.back();
  auto it = std::upper_bound(pts.begin(), pts.end(), q, [](item v, const weighted_point& p) { return v < p.y; });
  const auto i = static_cast<size_t>(it - pts.begin());
  return cum[i - 1] + pts[i].w * (gap(pts[i - 1].y, q) / gap(pts[i - 1].y, pts[i].y));
}

inline std::vector<double> prefix_sums(std::span<const weighted_point> pts) {
  std::vector<double> cum(pts.size());
  double acc = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) cum[i] = (acc += pts[i].w);
  return cum;
}

// Increase of one interpolated rank function between consecutive merged
// breakpoints prev < z. `cursor` is the index of the first point with y >= z.
// No breakpoint of `pts` lies strictly between prev and z.
inline double segment_mass(std::span<const weighted_point> pts, size_t cursor, item prev, item z) {
  if (cursor == pts.size()) return 0.0;
  if (cursor == 0) return pts[0].y == z ? pts[0].w : 0.0;
  return pts[cursor].w * (gap(prev, z) / gap(pts[cursor - 1].y, pts[cursor].y));
}

// Max deviation, over the breakpoints strictly inside (a, b), between the
// cumulative weights and the chord from (z_a, F_a) to (z_b, F_b).
inline double run_deviation(std::span<const item> z, std::span<const double> cum, size_t a, size_t b) {
  if (b <= a + 1) return 0.0;
  const double fa = cum[a];
  const double slope = (cum[b] - fa) / gap(z[a], z[b]);
  double worst = 0.0;
  for (size_t j = a + 1; j < b; ++j) {
    const double dev = std::fabs((cum[j] - fa) - slope * gap(z[a], z[j]));
    worst = dev > worst ? dev : worst;
  }
  return worst;
}

} // namespace detail

/// Collapses equal y values by summing weights. Input must be sorted by y
/// with positive weights.
inline std::vector<weighted_point> collapse_duplicates(std::span<const weighted_point> pts) {
  std::vector<weighted_point> out;
  out.reserve(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].w > 0.0) || !std::isfinite(pts[i].w)) {
      throw std::invalid_argument("weighted point weights must be positive and finite");
    }
    if (i > 0 && pts[i].y < pts[i - 1].y) throw std::invalid_argument("weighted points must be sorted by value");
    if (!out.empty() && out.back().y == pts[i].y) {
      out.back().w += pts[i].w;
    } else {
      out.push_back(pts[i]);
    }
  }
  return out;
}

/// Merges two interpolated weight lists: the result's rank function equals
/// the sum of both rank functions at every merged breakpoint, and its
/// weights are the finite differences of that sum.
inline std::vector<weighted_point> merge_points(std::span<const weighted_point> existing,
                                                std::span<const weighted_point> incoming) {
  const auto a = collapse_duplicates(existing);
  const auto b = collapse_duplicates(incoming);
  std::vector<weighted_point> out;
  out.reserve(a.size() + b.size());
  size_t ia = 0, ib = 0;
  item prev = 0;
  while (ia < a.size() || ib < b.size()) {
    item z;
    if (ib == b.size() || (ia < a.size() && a[ia].y <= b[ib].y)) {
      z = a[ia].y;
    } else {
      z = b[ib].y;
    }
    const double w = detail::segment_mass(a, ia, prev, z) + detail::segment_mass(b, ib, prev, z);
    out.push_back({z, w});
    if (ia < a.size() && a[ia].y == z) ++ia;
    if (ib < b.size() && b[ib].y == z) ++ib;
    prev = z;
  }
  return out;
}

/// Non-owning evaluable view of a piecewise-linear rank function.
class rank_function {
public:
  rank_function(std::span<const weighted_point> pts, std::span<const double> cum) noexcept : pts_(pts), cum_(cum) {}

  double operator()(item q) const { return detail::interpolated_rank(pts_, cum_, q); }
  size_t size() const noexcept { return pts_.size(); }
  item breakpoint(size_t j) const { return pts_[j].y; }
  /// F(z_j), the cumulative weight through the j-th breakpoint.
  double cumulative(size_t j) const { return cum_[j]; }
  double total() const noexcept { return cum_.empty() ? 0.0 : cum_.back(); }
  std::span<const weighted_point> points() const noexcept { return pts_; }

private:
  std::span<const weighted_point> pts_;
  std::span<const double> cum_;
};

/// Sup over all x of |before(x) - after(x)|, evaluated at the breakpoints of
/// `before`; that is where a halving's deviation peaks. Requires the
/// breakpoints of `after` to be a subset of those of `before`.
inline double sup_deviation(const rank_function& before, const rank_function& after) {
  size_t j = 0;
  for (size_t i = 0; i < after.size(); ++i) {
    while (j < before.size() && before.breakpoint(j) < after.breakpoint(i)) ++j;
    if (j == before.size() || before.breakpoint(j) != after.breakpoint(i)) {
      throw std::invalid_argument("sup_deviation: breakpoints of `after` must be a subset of `before`");
    }
  }
  double worst = 0.0;
  for (size_t j = 0; j < before.size(); ++j) {
    worst = std::max(worst, std::fabs(before.cumulative(j) - after(before.breakpoint(j))));
  }
  return worst;
}

/// Which breakpoints survive a halving, and the resulting sup deviation.
struct compaction_plan {
  std::vector<uint32_t> retained; // ascending indices into the pre-compaction points
  double objective = 0.0;
};

/// Minimum-sup-deviation choice of `keep` breakpoints out of `z` that retains
/// both extremes. Dynamic program over (next retained index, points left) with
/// precomputed run costs; among optimal choices the lexicographically smallest
/// index set wins.
inline compaction_plan plan_compaction(std::span<const item> z, std::span<const double> cum, size_t keep) {
  const size_t m = z.size();
  if (keep < 2 || keep > m) throw std::invalid_argument("plan_compaction: keep must be in [2, size]");
  compaction_plan plan;
  if (keep == m) {
    plan.retained.resize(m);
    for (size_t i = 0; i < m; ++i) plan.retained[i] = static_cast<uint32_t>(i);
    return plan;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  // A run can swallow at most m - keep breakpoints.
  const size_t max_span = m - keep + 1;
  std::vector<double> cost(m * (max_span + 1), inf); // cost[a * (max_span + 1) + (b - a)]
  const auto cost_at = [&](size_t a, size_t b) -> double& { return cost[a * (max_span + 1) + (b - a)]; };
  // Same arithmetic as detail::run_deviation, with the offsets from a hoisted
  // out so the scan over interior points vectorizes.
  std::vector<double> dz(max_span + 1), df(max_span + 1);
  for (size_t a = 0; a + 1 < m; ++a) {
    const size_t last = std::min(m - 1, a + max_span);
    for (size_t j = a; j <= last; ++j) {
      dz[j - a] = detail::gap(z[a], z[j]);
      df[j - a] = cum[j] - cum[a];
    }
    for (size_t b = a + 1; b <= last; ++b) {
      const size_t len = b - a;
      const double slope = df[len] / dz[len];
      double worst = 0.0;
#pragma omp simd reduction(max : worst)
      for (size_t j = 1; j < len; ++j) {
        const double e = std::fabs(df[j] - slope * dz[j]);
        worst = e > worst ? e : worst;
      }
      cost_at(a, b) = worst;
    }
  }

  // best[c][a]: smallest achievable max run cost from a to m-1 retaining c points (a and m-1 included)
  std::vector<std::vector<double>> best(keep + 1);
  best[1].assign(m, inf);
  best[1][m - 1] = 0.0;
  for (size_t c = 2; c <= keep; ++c) best[c].assign(m, inf);
  // Counts are processed in blocks with the start index descending, so each
  // cost row is loaded once per block instead of once per count.
  constexpr size_t block = 16;
  for (size_t c0 = 2; c0 <= keep; c0 += block) {
    const size_t c1 = std::min(keep, c0 + block - 1);
    for (size_t a = m - c0 + 1; a-- > 0;) {
      const double* cr = &cost_at(a, a) - a;
      for (size_t c = c0; c <= c1; ++c) {
        if (a + c > m || a + c < keep) continue;
        const size_t b_hi = std::min(m - c + 1, a + max_span);
        const double* nx = best[c - 1].data();
        double v = inf;
#pragma omp simd reduction(min : v)
        for (size_t b = a + 1; b <= b_hi; ++b) {
          const double d = cr[b] > nx[b] ? cr[b] : nx[b];
          v = d < v ? d : v;
        }
        best[c][a] = v;
      }
    }
  }

  plan.objective = best[keep][0];
  plan.retained.reserve(keep);
  plan.retained.push_back(0);
  size_t a = 0;
  for (size_t c = keep; c > 1; --c) {
    const size_t b_hi = std::min(m - c + 1, a + max_span);
    size_t chosen = m;
    for (size_t b = a + 1; b <= b_hi; ++b) {
      if (std::max(cost_at(a, b), best[c - 1][b]) <= plan.objective) {
        chosen = b;
        break;
      }
    }
    if (chosen == m) throw std::logic_error("plan_compaction: reconstruction failed");
    plan.retained.push_back(static_cast<uint32_t>(chosen));
    a = chosen;
  }
  return plan;
}

/// Points kept by a halving of m points: ceil(m / 2), never fewer than the two extremes.
inline size_t halving_target(size_t m) { return std::max<size_t>((m + 1) / 2, 2); }

struct linear_compaction_event {
  uint64_t index;                            // 1-based count of compactions including this one
  uint64_t new_points_since_last;            // breakpoints added since the previous compaction
  std::span<const weighted_point> before;
  std::span<const double> before_cumulative;
  std::span<const weighted_point> after;
  std::span<const double> after_cumulative;
  const compaction_plan& plan;
};

/// Sorted list of weighted points whose rank function interpolates linearly
/// between breakpoints. Capacity 0 means unbounded.
class linear_compactor {
public:
  explicit linear_compactor(uint32_t capacity = 0) : capacity_(capacity) {
    if (capacity % 2 != 0) throw std::invalid_argument("linear compactor capacity must be even");
  }

  linear_compactor(std::vector<weighted_point> pts, uint32_t capacity) : linear_compactor(capacity) {
    for (size_t i = 0; i < pts.size(); ++i) {
      if (!(pts[i].w > 0.0) || !std::isfinite(pts[i].w)) throw std::invalid_argument("weights must be positive");
      if (i > 0 && pts[i].y <= pts[i - 1].y) throw std::invalid_argument("points must be strictly increasing");
    }
    if (capacity_ != 0 && pts.size() > capacity_) throw std::length_error("more points than capacity");
    pts_ = std::move(pts);
    cum_ = detail::prefix_sums(pts_);
  }

  double rank(item q) const { return detail::interpolated_rank(pts_, cum_, q); }
  rank_function rank_fn() const noexcept { return {pts_, cum_}; }

  /// Rank-sum merge of `incoming` (sorted, positive weights). Throws
  /// std::length_error if the result would exceed capacity.
  void merge(std::span<const weighted_point> incoming) {
    if (incoming.empty()) return;
    auto merged = merge_points(pts_, incoming);
    if (capacity_ != 0 && merged.size() > capacity_) throw std::length_error("merge would exceed capacity");
    new_since_compaction_ += merged.size() - pts_.size();
    pts_ = std::move(merged);
    cum_ = detail::prefix_sums(pts_);
  }

  /// Replaces the points by an optimal halving. Only alpha = 1/2 is supported.
  compaction_plan compact(double alpha = 0.5) {
    if (alpha != 0.5) throw std::invalid_argument("only alpha = 1/2 is supported");
    if (pts_.size() < 2 || halving_target(pts_.size()) >= pts_.size()) return {};
    std::vector<item> z(pts_.size());
    for (size_t i = 0; i < pts_.size(); ++i) z[i] = pts_[i].y;
    auto plan = plan_compaction(z, cum_, halving_target(pts_.size()));
    std::vector<weighted_point> kept;
    kept.reserve(plan.retained.size());
    size_t prev = 0;
    for (uint32_t r : plan.retained) {
      double w = 0.0;
      for (size_t i = (kept.empty() ? 0 : prev + 1); i <= r; ++i) w += pts_[i].w;
      kept.push_back({pts_[r].y, w});
      prev = r;
    }
    ++compactions_;
    auto cum = detail::prefix_sums(kept);
    if (observer_) {
      observer_(linear_compaction_event{compactions_, new_since_compaction_, pts_, cum_, kept, cum, plan});
    }
    pts_ = std::move(kept);
    cum_ = std::move(cum);
    new_since_compaction_ = 0;
    return plan;
  }

  /// Merges a sorted batch, halving whenever the next new breakpoint would
  /// overflow a full compactor. Requires a nonzero capacity.
  void add(std::span<const weighted_point> batch) {
    if (capacity_ == 0) throw std::logic_error("add() requires a bounded compactor");
    auto pending = collapse_duplicates(batch);
    size_t begin = 0;
    while (begin < pending.size()) {
      const size_t room = capacity_ - pts_.size();
      size_t fresh = 0;
      size_t end = begin;
      for (; end < pending.size(); ++end) {
        const bool is_new = !std::binary_search(pts_.begin(), pts_.end(), weighted_point{pending[end].y, 0.0},
                                                [](const weighted_point& l, const weighted_point& r) { return l.y < r.y; });
        if (is_new && fresh == room) break;
        fresh += is_new;
      }
      merge(std::span<const weighted_point>(pending).subspan(begin, end - begin));
      begin = end;
      if (begin < pending.size()) compact();
    }
  }

  std::span<const weighted_point> points() const noexcept { return pts_; }
  std::span<const double> cumulative() const noexcept { return cum_; }
  size_t size() const noexcept { return pts_.size(); }
  bool empty() const noexcept { return pts_.empty(); }
  uint32_t capacity() const noexcept { return capacity_; }
  double total_weight() const noexcept { return cum_.empty() ? 0.0 : cum_.back(); }
  uint64_t compaction_count() const noexcept { return compactions_; }
  uint64_t new_points_since_compaction() const noexcept { return new_since_compaction_; }

  void set_compaction_observer(std::function<void(const linear_compaction_event&)> obs) {
    observer_ = std::move(obs);
  }

  /// z,w,F rows (F = cumulative weight through z).
  void write_csv(std::ostream& os) const {
    os << "z,w,F\n";
    char buf[96];
    for (size_t i = 0; i < pts_.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g\n", static_cast<unsigned long long>(pts_[i].y), pts_[i].w,
                    cum_[i]);
      os << buf;
    }
  }

  void serialize(byte_writer& out) const {
    out.u32(capacity_);
    out.u64(compactions_);
    out.u64(new_since_compaction_);
    out.u32(static_cast<uint32_t>(pts_.size()));
    for (const auto& p : pts_) {
      out.u64(p.y);
      out.f64(p.w);
    }
  }

  static linear_compactor deserialize(byte_reader& in) {
    const uint32_t capacity = in.u32();
    const uint64_t compactions = in.u64();
    const uint64_t new_since = in.u64();
    const uint32_t m = in.u32();
    if (capacity % 2 != 0 || (capacity != 0 && m > capacity)) in.fail("linear compactor size out of range");
    if (new_since > m) in.fail("linear compactor counts more new points than it holds");
    std::vector<weighted_point> pts(m);
    for (auto& p : pts) {
      p.y = in.u64();
      p.w = in.f64();
    }
    try {
      linear_compactor lc(std::move(pts), capacity);
      lc.compactions_ = compactions;
      lc.new_since_compaction_ = new_since;
      return lc;
    } catch (const std::exception& e) {
      in.fail(std::string("invalid linear compactor: ") + e.what());
    }
  }

  friend bool operator==(const linear_compactor& a, const linear_compactor& b) {
    return a.capacity_ == b.capacity_ && a.compactions_ == b.compactions_ &&
           a.new_since_compaction_ == b.new_since_compaction_ && a.pts_ == b.pts_;
  }

private:
  uint32_t capacity_;
  std::vector<weighted_point> pts_;
  std::vector<double> cum_;
  uint64_t compactions_ = 0;
  uint64_t new_since_compaction_ = 0;
  std::function<void(const linear_compaction_event&)> observer_;
};

} // namespace linsketch

#endif // LINSKETCH_LINEAR_COMPACTOR_HPP_
