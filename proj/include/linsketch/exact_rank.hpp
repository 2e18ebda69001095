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

#ifndef LINSKETCH_EXACT_RANK_HPP_
#define LINSKETCH_EXACT_RANK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "linear_sketch.hpp"

namespace linsketch {

/// Ground-truth rank over a materialized dataset.
class exact_rank {
public:
  explicit exact_rank(std::span<const item> data) : sorted_(data.begin(), data.end()) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  /// |{x : x <= q}|
  uint64_t operator()(item q) const {
    return static_cast<uint64_t>(std::upper_bound(sorted_.begin(), sorted_.end(), q) - sorted_.begin());
  }

  uint64_t size() const noexcept { return sorted_.size(); }
  std::span<const item> sorted() const noexcept { return sorted_; }

  /// The evaluation set: every distinct value, or `limit` evenly spaced
  /// distinct values when there are more than that.
  std::vector<item> evaluation_points(size_t limit = default_eval_limit) const {
    std::vector<item> distinct;
    distinct.reserve(sorted_.size());
    std::unique_copy(sorted_.begin(), sorted_.end(), std::back_inserter(distinct));
    if (distinct.size() <= limit) return distinct;
    std::vector<item> out(limit);
    for (size_t i = 0; i < limit; ++i) {
      out[i] = distinct[static_cast<size_t>((static_cast<unsigned __int128>(i) * (distinct.size() - 1)) / (limit - 1))];
    }
    return out;
  }

  static constexpr size_t default_eval_limit = size_t{1} << 20;

private:
  std::vector<item> sorted_;
};

struct error_summary {
  double avg_l1 = 0.0; // mean absolute rank error over the evaluation set
  double sum_l1 = 0.0; // the same, unnormalized
  double sup = 0.0;
  size_t points = 0;
};

/// Absolute rank error of `approx` (any callable item -> double) against the
/// exact rank, over `points`.
template<typename RankFn>
error_summary error_metrics(const exact_rank& truth, const RankFn& approx, std::span<const item> points) {
  if (truth.size() == 0) throw std::invalid_argument("error_metrics: empty dataset");
  if (points.empty()) throw std::invalid_argument("error_metrics: empty evaluation set");
  error_summary out;
  for (item q : points) {
    const double err = std::fabs(static_cast<double>(truth(q)) - approx(q));
    out.sum_l1 += err;
    out.sup = std::max(out.sup, err);
  }
  out.points = points.size();
  out.avg_l1 = out.sum_l1 / static_cast<double>(points.size());
  return out;
}

inline error_summary error_metrics(const exact_rank& truth, const linear_sketch& sketch,
                                   size_t eval_limit = exact_rank::default_eval_limit) {
  if (truth.size() == 0) throw std::invalid_argument("error_metrics: empty dataset");
  const auto view = sketch.view();
  const auto points = truth.evaluation_points(eval_limit);
  return error_metrics(truth, [&](item q) { return view.rank(q); }, points);
}

} // namespace linsketch

#endif // LINSKETCH_EXACT_RANK_HPP_
