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


// quantbench: sweep sketches over datasets and stream orders, then reduce the
// resulting CSV into space-error frontiers and error-ratio hulls.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "linsketch/sweep.hpp"

using namespace linsketch;

namespace {

struct output_file {
  explicit output_file(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

std::vector<error_report> load_reports(const std::string& path) {
  if (path == "-") return read_reports_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_reports_csv(in);
}

void check_metric(const std::string& metric) { error_report{}.metric(metric); }

using group_key = std::pair<std::string, std::string>; // (dataset, order)

std::map<group_key, std::set<std::string>> algorithms_by_group(const std::vector<error_report>& rows) {
  std::map<group_key, std::set<std::string>> out;
  for (const auto& r : rows) out[{r.dataset, r.order}].insert(r.algorithm);
  return out;
}

int run_sweep_cmd(const std::vector<std::string>& datasets, uint64_t n, uint64_t data_seed, uint64_t limit,
                  const std::vector<std::string>& orders, const std::vector<uint32_t>& ks,
                  const std::vector<uint32_t>& ts, const std::vector<uint64_t>& seeds, double c, size_t eval_limit,
                  unsigned jobs, bool timing, const std::string& output) {
  sweep_config cfg;
  for (const auto& d : datasets) cfg.datasets.push_back({d, n, data_seed, limit});
  cfg.orders.clear();
  for (const auto& o : orders) {
    auto parsed = parse_stream_order(o);
    if (!parsed) throw std::invalid_argument("unknown stream order: " + o);
    cfg.orders.push_back(*parsed);
  }
  cfg.ks = ks;
  cfg.ts = ts;
  cfg.seeds = seeds;
  cfg.c = c;
  cfg.eval_limit = eval_limit;
  cfg.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
  cfg.timing = timing;
  cfg.validate();

  output_file out(output);
  size_t failed = 0;
  const auto rows = run_sweep(cfg, [&](const std::string& msg) {
    ++failed;
    std::cerr << "quantbench: " << msg << '\n';
  });
  write_reports_csv(out.stream(), rows, timing);
  return failed == 0 ? 0 : 2;
}

int run_frontier_cmd(const std::string& input, const std::string& metric, const std::string& output) {
  check_metric(metric);
  const auto rows = load_reports(input);
  output_file out(output);
  auto& os = out.stream();
  os << "algorithm,dataset,order,envelope,space,error\n";
  for (const auto& [key, algos] : algorithms_by_group(rows)) {
    for (const auto& algo : algos) {
      const auto pts = select_points(rows, algo, key.first, key.second, metric);
      frontier f;
      try {
        f = compute_frontier(pts);
      } catch (const degenerate_frontier& e) {
        std::cerr << "quantbench: skipping " << algo << '/' << key.first << '/' << key.second << ": " << e.what()
                  << '\n';
        continue;
      }
      for (const auto& [name, env] : {std::pair{"lower", &f.lower}, std::pair{"upper", &f.upper}}) {
        for (const auto& v : env->vertices()) {
          os << algo << ',' << key.first << ',' << key.second << ',' << name << ',' << detail::fmt_double(v.space)
             << ',' << detail::fmt_double(v.error) << '\n';
        }
      }
    }
  }
  return 0;
}

int run_ratio_cmd(const std::string& input, const std::string& metric, const std::string& candidate,
                  const std::string& reference, size_t samples, const std::string& output) {
  check_metric(metric);
  const auto rows = load_reports(input);
  output_file out(output);
  auto& os = out.stream();
  // numerator / denominator name the two orientations explicitly
  os << "dataset,order,numerator,denominator,space,lo,hi\n";
  size_t emitted = 0;
  for (const auto& [key, algos] : algorithms_by_group(rows)) {
    if (!algos.count(candidate) || !algos.count(reference)) continue;
    frontier fc, fr;
    try {
      fc = compute_frontier(select_points(rows, candidate, key.first, key.second, metric));
      fr = compute_frontier(select_points(rows, reference, key.first, key.second, metric));
    } catch (const degenerate_frontier& e) {
      std::cerr << "quantbench: skipping " << key.first << '/' << key.second << ": " << e.what() << '\n';
      continue;
    }
    try {
      for (const auto& s : ratio_hull(fc, fr, samples)) {
        os << key.first << ',' << key.second << ',' << reference << ',' << candidate << ','
           << detail::fmt_double(s.space) << ',' << detail::fmt_double(s.lo) << ',' << detail::fmt_double(s.hi) << '\n';
      }
      for (const auto& s : ratio_hull(fr, fc, samples)) {
        os << key.first << ',' << key.second << ',' << candidate << ',' << reference << ','
           << detail::fmt_double(s.space) << ',' << detail::fmt_double(s.lo) << ',' << detail::fmt_double(s.hi) << '\n';
      }
      ++emitted;
    } catch (const no_overlap& e) {
      std::cerr << "quantbench: skipping " << key.first << '/' << key.second << ": " << e.what() << '\n';
    }
  }
  if (emitted == 0) {
    std::cerr << "quantbench: no (dataset, order) group has overlapping frontiers for " << candidate << " and "
              << reference << '\n';
    return 2;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-error benchmark for KLL and linear-compactor quantile sketches"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "Run every (dataset, order, algorithm, k, seed) cell and emit CSV");
  std::vector<std::string> datasets;
  uint64_t n = 1'000'000, data_seed = 1, limit = 0;
  std::vector<std::string> orders{"random"};
  std::vector<uint32_t> ks{32, 64, 128, 256, 512, 1024};
  std::vector<uint32_t> ts{0, 2};
  std::vector<uint64_t> seeds{0};
  double c = kll_sketch::default_c;
  size_t eval_limit = exact_rank::default_eval_limit;
  unsigned jobs = 1;
  bool timing = false;
  std::string sweep_out = "-";
  sweep->add_option("-d,--dataset", datasets, "SOSD file path or synth:{uniform,lognormal,mixture,zipf}")->required();
  sweep->add_option("-n,--n", n, "Keys per synthetic dataset")->check(CLI::PositiveNumber);
  sweep->add_option("--data-seed", data_seed, "Seed of the synthetic generators");
  sweep->add_option("--limit", limit, "Stride-subsample file datasets to this many keys (0 keeps all)");
  sweep->add_option("--order", orders, "Stream orders (repeat or comma-separate): random, sorted, half, flipflop")->delimiter(',');
  sweep->add_option("-k,--k", ks, "Space parameters")->delimiter(',');
  sweep->add_option("-t,--t", ts, "Linear compactor heights; 0 runs plain KLL")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Sketch seeds, one row per seed")->delimiter(',');
  sweep->add_option("-c,--c", c, "Capacity decay factor")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--eval-points", eval_limit, "Maximum number of evaluation points")->check(CLI::Range(2, 1 << 30));
  sweep->add_option("-j,--jobs", jobs, "Worker threads (0 = hardware concurrency)");
  sweep->add_flag("--timing", timing, "Append a wall_ms column (not reproducible)");
  sweep->add_option("-o,--output", sweep_out, "Output CSV ('-' for stdout)");

  auto* front = app.add_subcommand("frontier", "Lower and upper envelopes per (algorithm, dataset, order)");
  std::string front_in, front_out = "-", front_metric = "avg_l1";
  front->add_option("-i,--input", front_in, "Sweep CSV ('-' for stdin)")->required();
  front->add_option("-m,--metric", front_metric, "avg_l1, sum_l1 or sup_error");
  front->add_option("-o,--output", front_out, "Output CSV ('-' for stdout)");

  auto* ratio = app.add_subcommand("ratio", "Error-ratio hulls between two algorithms, in both orientations");
  std::string ratio_in, ratio_out = "-", ratio_metric = "avg_l1", candidate = "linear-t2", reference = "kll";
  size_t samples = 64;
  ratio->add_option("-i,--input", ratio_in, "Sweep CSV ('-' for stdin)")->required();
  ratio->add_option("-m,--metric", ratio_metric, "avg_l1, sum_l1 or sup_error");
  ratio->add_option("--candidate", candidate, "Algorithm id");
  ratio->add_option("--reference", reference, "Algorithm id");
  ratio->add_option("--samples", samples, "Log-spaced sample count")->check(CLI::PositiveNumber);
  ratio->add_option("-o,--output", ratio_out, "Output CSV ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      return run_sweep_cmd(datasets, n, data_seed, limit, orders, ks, ts, seeds, c, eval_limit, jobs, timing,
                           sweep_out);
    }
    if (*front) return run_frontier_cmd(front_in, front_metric, front_out);
    if (*ratio) return run_ratio_cmd(ratio_in, ratio_metric, candidate, reference, samples, ratio_out);
  } catch (const std::exception& e) {
    std::cerr << "quantbench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
