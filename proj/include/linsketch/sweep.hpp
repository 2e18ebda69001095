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

#ifndef LINSKETCH_SWEEP_HPP_
#define LINSKETCH_SWEEP_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dataset.hpp"
#include "exact_rank.hpp"
#include "frontier.hpp"
#include "linear_sketch.hpp"
#include "stream_order.hpp"

namespace linsketch {

/// One row of a sweep: one sketch run over one ordered dataset.
struct error_report {
  std::string algorithm;
  std::string dataset;
  std::string order;
  uint32_t k = 0;
  uint32_t t = 0;
  double c = kll_sketch::default_c;
  uint64_t seed = 0;
  uint64_t n = 0;
  uint64_t space_words = 0;
  double avg_l1 = 0.0;
  double sum_l1 = 0.0;
  double sup_error = 0.0;
  double wall_ms = 0.0;

  double metric(const std::string& name) const {
    if (name == "avg_l1") return avg_l1;
    if (name == "sum_l1") return sum_l1;
    if (name == "sup_error" || name == "sup") return sup_error;
    throw std::invalid_argument("unknown error metric: " + name);
  }
};

struct sweep_config {
  std::vector<dataset_spec> datasets;
  std::vector<stream_order> orders{stream_order::random};
  std::vector<uint32_t> ks{32, 64, 128, 256, 512, 1024};
  std::vector<uint32_t> ts{0, 2};
  std::vector<uint64_t> seeds{0};
  double c = kll_sketch::default_c;
  size_t eval_limit = exact_rank::default_eval_limit;
  unsigned jobs = 1;
  bool timing = false;

  void validate() const {
    if (datasets.empty() || orders.empty() || ks.empty() || ts.empty() || seeds.empty()) {
      throw std::invalid_argument("sweep grids must be non-empty");
    }
    for (uint32_t t : ts) {
      for (uint32_t k : ks) sketch_params{k, c, t, 0}.validate();
    }
  }
};

/// Runs one sketch over `stream` and scores it against `truth` at `points`.
inline error_report run_cell(std::span<const item> stream, const exact_rank& truth, std::span<const item> points,
                             const sketch_params& p) {
  linear_sketch sketch(p);
  const auto start = std::chrono::steady_clock::now();
  for (item x : stream) sketch.update(x);
  const auto stop = std::chrono::steady_clock::now();
  const auto view = sketch.view();
  const auto err = error_metrics(truth, [&](item q) { return view.rank(q); }, points);
  error_report r;
  r.algorithm = p.algorithm_id();
  r.k = p.k;
  r.t = p.t;
  r.c = p.c;
  r.seed = p.seed;
  r.n = sketch.n();
  r.space_words = sketch.space();
  r.avg_l1 = err.avg_l1;
  r.sum_l1 = err.sum_l1;
  r.sup_error = err.sup;
  r.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return r;
}

/// Every (dataset, order, t, k, seed) cell in that nesting order. A dataset
/// that fails to load is reported through `log` and contributes no rows.
inline std::vector<error_report> run_sweep(const sweep_config& cfg,
                                           const std::function<void(const std::string&)>& log = {}) {
  cfg.validate();
  std::vector<error_report> out;
  for (const auto& ds : cfg.datasets) {
    std::vector<item> data;
    try {
      data = load_dataset(ds);
    } catch (const std::exception& e) {
      if (log) log("skipping dataset " + ds.source + ": " + e.what());
      continue;
    }
    const exact_rank truth(data);
    const auto points = truth.evaluation_points(cfg.eval_limit);

    struct task {
      stream_order order;
      sketch_params params;
    };
    std::vector<task> tasks;
    for (auto order : cfg.orders) {
      for (uint32_t t : cfg.ts) {
        for (uint32_t k : cfg.ks) {
          for (uint64_t seed : cfg.seeds) tasks.push_back({order, {k, cfg.c, t, seed}});
        }
      }
    }
    std::vector<error_report> rows(tasks.size());
    std::atomic<size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr failure;
    auto worker = [&] {
      for (size_t i = next++; i < tasks.size(); i = next++) {
        try {
          const auto& tk = tasks[i];
          const auto stream = apply_order(data, tk.order, tk.params.seed ^ 0x0dde4ULL);
          rows[i] = run_cell(stream, truth, points, tk.params);
          rows[i].dataset = ds.id();
          rows[i].order = std::string(to_string(tk.order));
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(tasks.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

} // namespace detail

inline constexpr const char* report_csv_header =
    "algorithm,dataset,order,k,t,c,seed,n,space_words,avg_l1,sum_l1,sup_error";

inline void write_reports_csv(std::ostream& os, std::span<const error_report> rows, bool timing = false) {
  os << report_csv_header << (timing ? ",wall_ms" : "") << '\n';
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.dataset << ',' << r.order << ',' << r.k << ',' << r.t << ','
       << detail::fmt_double(r.c) << ',' << r.seed << ',' << r.n << ',' << r.space_words << ','
       << detail::fmt_double(r.avg_l1) << ',' << detail::fmt_double(r.sum_l1) << ',' << detail::fmt_double(r.sup_error);
    if (timing) os << ',' << detail::fmt_double(r.wall_ms);
    os << '\n';
  }
}

inline std::vector<error_report> read_reports_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("report CSV is empty");
  const auto header = detail::split_csv_line(line);
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"algorithm", "dataset", "order", "k", "t", "seed", "space_words", "avg_l1", "sup_error"}) {
    if (!col.count(need)) throw std::runtime_error(std::string("report CSV lacks column ") + need);
  }
  std::vector<error_report> rows;
  size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw std::runtime_error("report CSV line " + std::to_string(lineno) + ": wrong arity");
    auto get = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };
    auto opt = [&](const char* name, double dflt) { return col.count(name) ? std::stod(cells[col.at(name)]) : dflt; };
    try {
      error_report r;
      r.algorithm = get("algorithm");
      r.dataset = get("dataset");
      r.order = get("order");
      r.k = static_cast<uint32_t>(std::stoul(get("k")));
      r.t = static_cast<uint32_t>(std::stoul(get("t")));
      r.seed = std::stoull(get("seed"));
      r.space_words = std::stoull(get("space_words"));
      r.avg_l1 = std::stod(get("avg_l1"));
      r.sup_error = std::stod(get("sup_error"));
      r.c = opt("c", kll_sketch::default_c);
      r.n = static_cast<uint64_t>(opt("n", 0));
      r.sum_l1 = opt("sum_l1", 0.0);
      r.wall_ms = opt("wall_ms", 0.0);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("report CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

/// (space, metric) points of the rows matching `algorithm`, `dataset` and
/// `order` (empty filter strings match everything).
inline std::vector<space_error> select_points(std::span<const error_report> rows, const std::string& algorithm,
                                              const std::string& dataset, const std::string& order,
                                              const std::string& metric) {
  std::vector<space_error> pts;
  for (const auto& r : rows) {
    if ((algorithm.empty() || r.algorithm == algorithm) && (dataset.empty() || r.dataset == dataset) &&
        (order.empty() || r.order == order)) {
      pts.push_back({static_cast<double>(r.space_words), r.metric(metric)});
    }
  }
  return pts;
}

} // namespace linsketch

#endif // LINSKETCH_SWEEP_HPP_
