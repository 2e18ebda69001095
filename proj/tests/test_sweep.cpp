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


#include <gtest/gtest.h>

#include <sstream>

#include "linsketch/sweep.hpp"

using namespace linsketch;

namespace {

sweep_config small_config() {
  sweep_config cfg;
  cfg.datasets = {{"synth:lognormal", 20000, 1}};
  cfg.orders = {stream_order::random, stream_order::flipflop};
  cfg.ks = {16, 32};
  cfg.ts = {0, 2};
  cfg.seeds = {0, 1};
  cfg.eval_limit = 4096;
  return cfg;
}

std::string to_csv(const std::vector<error_report>& rows, bool timing = false) {
  std::ostringstream os;
  write_reports_csv(os, rows, timing);
  return os.str();
}

} // namespace

TEST(Sweep, OneCellGivesOneRowPerSeed) {
  sweep_config cfg = small_config();
  cfg.orders = {stream_order::sorted};
  cfg.ks = {32};
  cfg.ts = {2};
  cfg.seeds = {4, 5, 6};
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 3u);
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].seed, cfg.seeds[i]);
    EXPECT_EQ(rows[i].algorithm, "linear-t2");
    EXPECT_EQ(rows[i].order, "sorted");
    EXPECT_EQ(rows[i].dataset, "lognormal-20000-s1");
    EXPECT_EQ(rows[i].n, 20000u);
    EXPECT_GT(rows[i].space_words, 0u);
    EXPECT_LE(rows[i].avg_l1, rows[i].sup_error);
  }
}

TEST(Sweep, RowsFollowGridOrder) {
  const auto rows = run_sweep(small_config());
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows[0].order, "random");
  EXPECT_EQ(rows[0].algorithm, "kll");
  EXPECT_EQ(rows[0].k, 16u);
  EXPECT_EQ(rows[1].seed, 1u);
  EXPECT_EQ(rows[2].k, 32u);
  EXPECT_EQ(rows[4].algorithm, "linear-t2");
  EXPECT_EQ(rows[8].order, "flipflop");
}

TEST(Sweep, ReproducibleCsvRegardlessOfThreads) {
  auto cfg = small_config();
  const auto a = to_csv(run_sweep(cfg));
  const auto b = to_csv(run_sweep(cfg));
  cfg.jobs = 4;
  const auto c = to_csv(run_sweep(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a.substr(0, a.find('\n')), report_csv_header);
}

TEST(Sweep, CsvRoundTrip) {
  const auto rows = run_sweep(small_config());
  std::istringstream in(to_csv(rows, true));
  const auto back = read_reports_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].algorithm, rows[i].algorithm);
    EXPECT_EQ(back[i].space_words, rows[i].space_words);
    EXPECT_EQ(back[i].avg_l1, rows[i].avg_l1);
    EXPECT_EQ(back[i].sum_l1, rows[i].sum_l1);
    EXPECT_EQ(back[i].sup_error, rows[i].sup_error);
    EXPECT_EQ(back[i].wall_ms, rows[i].wall_ms);
  }
}

TEST(Sweep, MalformedCsvIsRejected) {
  std::istringstream missing("algorithm,dataset\nkll,x\n");
  EXPECT_THROW(read_reports_csv(missing), std::runtime_error);
  std::istringstream arity(std::string(report_csv_header) + "\nkll,x,random,1\n");
  EXPECT_THROW(read_reports_csv(arity), std::runtime_error);
  std::istringstream number(std::string(report_csv_header) + "\nkll,x,random,abc,0,0.5,0,1,1,1,1,1\n");
  EXPECT_THROW(read_reports_csv(number), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(read_reports_csv(empty), std::runtime_error);
}

TEST(Sweep, FailedDatasetIsLoggedAndSkipped) {
  auto cfg = small_config();
  cfg.datasets.insert(cfg.datasets.begin(), dataset_spec{"/nonexistent/keys.bin"});
  std::vector<std::string> log;
  const auto rows = run_sweep(cfg, [&](const std::string& m) { log.push_back(m); });
  EXPECT_EQ(rows.size(), 16u);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_NE(log[0].find("/nonexistent/keys.bin"), std::string::npos);
}

TEST(Sweep, InvalidGridsAreRejected) {
  auto cfg = small_config();
  cfg.ks = {};
  EXPECT_THROW(run_sweep(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.ts = {5};
  EXPECT_THROW(run_sweep(cfg), std::invalid_argument);
}

TEST(Sweep, SelectPointsFilters) {
  const auto rows = run_sweep(small_config());
  const auto kll_random = select_points(rows, "kll", "", "random", "sup");
  EXPECT_EQ(kll_random.size(), 4u);
  EXPECT_EQ(select_points(rows, "", "", "", "avg_l1").size(), 16u);
  EXPECT_THROW(select_points(rows, "kll", "", "", "median"), std::invalid_argument);
}
