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

#ifndef LINSKETCH_FRONTIER_HPP_
#define LINSKETCH_FRONTIER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace linsketch {

struct space_error {
  double space;
  double error;
  friend bool operator==(const space_error&, const space_error&) = default;
};

/// Raised when a frontier cannot be formed (fewer than two distinct spaces).
class degenerate_frontier : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two frontiers share no space range.
class no_overlap : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Piecewise-linear curve through vertices sorted by space; interpolation is
/// linear in (log space, log error), falling back to linear error when an
/// endpoint error is zero.
class envelope {
public:
  envelope() = default;
  explicit envelope(std::vector<space_error> vertices) : v_(std::move(vertices)) {}

  const std::vector<space_error>& vertices() const noexcept { return v_; }
  double min_space() const { return v_.front().space; }
  double max_space() const { return v_.back().space; }

  double at(double s) const {
    if (v_.empty() || s < min_space() || s > max_space()) throw std::out_of_range("envelope evaluated outside its range");
    auto it = std::lower_bound(v_.begin(), v_.end(), s, [](const space_error& p, double x) { return p.space < x; });
    if (it->space == s) return it->error;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double f = std::log(s / lo.space) / std::log(hi.space / lo.space);
    const double v = lo.error > 0.0 && hi.error > 0.0 ? std::exp(std::log(lo.error) + f * std::log(hi.error / lo.error))
                                                      : lo.error + f * (hi.error - lo.error);
    // exp/log rounding must not carry the curve past either vertex
    return std::clamp(v, std::min(lo.error, hi.error), std::max(lo.error, hi.error));
  }

private:
  std::vector<space_error> v_;
};

struct frontier {
  envelope lower; // best error achievable within a space budget
  envelope upper; // worst error observed at or beyond a space budget
};

/// Lower envelope: at each space s, the minimum error over points with space
/// <= s, kept at the vertices where it improves plus the largest space.
/// Upper envelope: the same staircase with max, the maximum error over points
/// with space <= s, kept where it rises plus the largest space.
inline frontier compute_frontier(std::span<const space_error> points) {
  if (points.size() < 2) throw degenerate_frontier("frontier needs at least two points");
  std::vector<space_error> p(points.begin(), points.end());
  for (const auto& q : p) {
    if (!(q.space > 0.0) || !(q.error >= 0.0)) throw std::invalid_argument("frontier points need space > 0, error >= 0");
  }
  std::sort(p.begin(), p.end(), [](const space_error& a, const space_error& b) {
    return a.space != b.space ? a.space < b.space : a.error < b.error;
  });
  if (p.front().space == p.back().space) throw degenerate_frontier("all points share one space value");

  // collapse equal spaces to (min, max) error
  struct column { double space, lo, hi; };
  std::vector<column> cols;
  for (const auto& q : p) {
    if (!cols.empty() && cols.back().space == q.space) {
      cols.back().lo = std::min(cols.back().lo, q.error);
      cols.back().hi = std::max(cols.back().hi, q.error);
    } else {
      cols.push_back({q.space, q.error, q.error});
    }
  }

  std::vector<space_error> lower;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].lo < best) {
      best = cols[i].lo;
      lower.push_back({cols[i].space, best});
    } else if (i + 1 == cols.size()) {
      lower.push_back({cols[i].space, best});
    }
  }

  std::vector<space_error> upper;
  double worst = -1.0;
  for (size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].hi > worst) {
      worst = cols[i].hi;
      upper.push_back({cols[i].space, worst});
    } else if (i + 1 == cols.size()) {
      upper.push_back({cols[i].space, worst});
    }
  }
  return {envelope(std::move(lower)), envelope(std::move(upper))};
}

struct ratio_sample {
  double space;
  double lo; // best-case ratio: reference lower / candidate upper
  double hi; // worst-case ratio: reference upper / candidate lower
};

/// Error-ratio hull of `reference` over `candidate` (reference error divided
/// by candidate error; > 1 means the candidate is more accurate), sampled on
/// `samples` log-spaced spaces across the shared range.
inline std::vector<ratio_sample> ratio_hull(const frontier& candidate, const frontier& reference, size_t samples = 64) {
  const double lo = std::max({candidate.lower.min_space(), candidate.upper.min_space(), reference.lower.min_space(),
                              reference.upper.min_space()});
  const double hi = std::min({candidate.lower.max_space(), candidate.upper.max_space(), reference.lower.max_space(),
                              reference.upper.max_space()});
  if (!(lo <= hi)) throw no_overlap("frontiers share no space range");
  if (samples < 2 || lo == hi) samples = 1;
  std::vector<ratio_sample> out;
  out.reserve(samples);
  for (size_t i = 0; i < samples; ++i) {
    double s = std::exp(std::log(lo) + std::log(hi / lo) * static_cast<double>(i) / static_cast<double>(std::max<size_t>(samples - 1, 1)));
    if (i + 1 == samples) s = hi;
    if (i == 0) s = lo;
    s = std::clamp(s, lo, hi);
    out.push_back({s, reference.lower.at(s) / candidate.upper.at(s), reference.upper.at(s) / candidate.lower.at(s)});
  }
  return out;
}

} // namespace linsketch

#endif // LINSKETCH_FRONTIER_HPP_
