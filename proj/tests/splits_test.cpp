// Copyright 2026 The PhaseForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "phaseforge/error.hpp"
#include "phaseforge/splits.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace phaseforge {
namespace {

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    FAIL() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

SplitOptions options(std::size_t folds, std::size_t test, std::uint64_t seed,
                     SplitMode mode = SplitMode::kAuto) {
  SplitOptions o;
  o.fold_count = folds;
  o.test_size = test;
  o.seed = seed;
  o.mode = mode;
  return o;
}

void expect_valid(const SplitPlan& plan, const std::vector<CaseMetadata>& cases,
                  std::size_t test_size) {
  std::set<std::string> all;
  for (const auto& c : cases) all.insert(c.case_id);
  for (const auto& f : plan.folds) {
    ASSERT_EQ(f.test_ids.size(), test_size);
    std::set<std::string> test(f.test_ids.begin(), f.test_ids.end());
    std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
    ASSERT_EQ(test.size(), f.test_ids.size());
    ASSERT_EQ(train.size(), f.train_ids.size());
    for (const auto& id : test) ASSERT_EQ(train.count(id), 0u);
    std::set<std::string> both = test;
    both.insert(train.begin(), train.end());
    ASSERT_EQ(both, all);
  }
}

// Raw covariate columns in case order, for the oracle scorer.
std::vector<std::vector<std::optional<double>>> columns(const std::vector<CaseMetadata>& cases,
                                                        const std::vector<std::string>& names) {
  std::vector<std::vector<std::optional<double>>> out;
  for (const auto& n : names) {
    std::vector<std::optional<double>> col;
    for (const auto& c : cases) col.push_back(c.covariate(n));
    out.push_back(col);
  }
  return out;
}

std::vector<std::vector<std::size_t>> test_indices(const SplitPlan& plan,
                                                   const std::vector<CaseMetadata>& cases) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cases.size(); ++i) index[cases[i].case_id] = i;
  std::vector<std::vector<std::size_t>> out;
  for (const auto& f : plan.folds) {
    std::vector<std::size_t> set;
    for (const auto& id : f.test_ids) set.push_back(index.at(id));
    out.push_back(set);
  }
  return out;
}

TEST(Splits, ExhaustivePartitionOf24) {
  gen::Rng rng(1);
  const auto cases = gen::cohort(rng, 24);
  const auto plan = stratified_splits(cases, options(6, 4, 7));
  EXPECT_EQ(plan.mode, SplitMode::kExhaustive);
  ASSERT_EQ(plan.folds.size(), 6u);
  expect_valid(plan, cases, 4);
  std::multiset<std::string> seen;
  for (const auto& f : plan.folds) seen.insert(f.test_ids.begin(), f.test_ids.end());
  EXPECT_EQ(seen.size(), 24u);
  for (const auto& c : cases) EXPECT_EQ(seen.count(c.case_id), 1u);
  EXPECT_EQ(plan.folds[0].name, "split1");
}

TEST(Splits, IdenticalCasesScoreZero) {
  CaseMetadata a{"a", 50, 100, 20, 24, RecordingSystem::kSi, {}};
  CaseMetadata b = a;
  b.case_id = "b";
  const auto plan = stratified_splits(std::vector<CaseMetadata>{a, b}, options(2, 1, 3));
  EXPECT_EQ(plan.balance_score, 0.0);
}

TEST(Splits, Deterministic) {
  gen::Rng rng(2);
  const auto cases = gen::cohort(rng, 30, 0.1);
  for (auto mode : {SplitMode::kExhaustive, SplitMode::kIndependent}) {
    const auto o = options(3, 5, 99, mode);
    EXPECT_EQ(stratified_splits(cases, o), stratified_splits(cases, o));
  }
}

TEST(Splits, Errors) {
  gen::Rng rng(3);
  const auto cases = gen::cohort(rng, 5);
  expect_code(ErrorCode::kTooFewCases, [&] { stratified_splits(cases, options(1, 5, 0)); });
  expect_code(ErrorCode::kTooFewCases,
              [&] { stratified_splits(cases, options(3, 2, 0, SplitMode::kExhaustive)); });
  expect_code(ErrorCode::kInvalidArgument, [&] { stratified_splits(cases, options(0, 1, 0)); });
  expect_code(ErrorCode::kInvalidArgument, [&] { stratified_splits(cases, options(1, 0, 0)); });
  auto o = options(2, 2, 0);
  o.covariates = {"shoe_size"};
  expect_code(ErrorCode::kUnknownCovariate, [&] { stratified_splits(cases, o); });
  auto dup = cases;
  dup[1].case_id = dup[0].case_id;
  expect_code(ErrorCode::kInvalidArgument, [&] { stratified_splits(dup, options(2, 2, 0)); });
}

TEST(Splits, ImputationIsLogged) {
  gen::Rng rng(4);
  auto cases = gen::cohort(rng, 10);
  cases[3].bmi.reset();
  const auto plan = stratified_splits(cases, options(2, 5, 1));
  ASSERT_EQ(plan.imputed.size(), 1u);
  EXPECT_EQ(plan.imputed[0].case_id, cases[3].case_id);
  EXPECT_EQ(plan.imputed[0].covariate, "bmi");
  double sum = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (i != 3) sum += *cases[i].bmi;
  }
  EXPECT_NEAR(plan.imputed[0].value, sum / 9, 1e-12);
}

TEST(Splits, ExtraCovariate) {
  gen::Rng rng(5);
  auto cases = gen::cohort(rng, 12);
  for (std::size_t i = 0; i < cases.size(); ++i) cases[i].extra["asa"] = static_cast<double>(i % 3);
  auto o = options(3, 4, 2);
  o.covariates = {"asa"};
  const auto plan = stratified_splits(cases, o);
  EXPECT_EQ(plan.covariates, std::vector<std::string>{"asa"});
  EXPECT_NEAR(plan.balance_score,
              oracle::balance_score(columns(cases, {"asa"}), test_indices(plan, cases)), 1e-12);
}

TEST(Splits, ScoreMatchesOracleAndNeverWorsens) {
  gen::Rng rng(6);
  const std::vector<std::string> standard(std::begin(kStandardCovariates),
                                          std::end(kStandardCovariates));
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = gen::uniform(rng, 6, 40);
    const auto cases = gen::cohort(rng, n, 0.05);
    const std::size_t test = gen::uniform(rng, 1, n / 3);
    const std::size_t folds = gen::uniform(rng, 1, n / test);
    const auto mode = trial % 2 ? SplitMode::kIndependent : SplitMode::kExhaustive;
    const auto plan = stratified_splits(cases, options(folds, test, trial, mode));
    expect_valid(plan, cases, test);
    ASSERT_LE(plan.balance_score, plan.initial_score);
    ASSERT_NEAR(plan.balance_score,
                oracle::balance_score(columns(cases, standard), test_indices(plan, cases)), 1e-9);
    if (mode == SplitMode::kExhaustive) {
      std::set<std::string> seen;
      for (const auto& f : plan.folds) {
        for (const auto& id : f.test_ids) ASSERT_TRUE(seen.insert(id).second);
      }
    }
  }
}

TEST(Splits, AutoModeSelection) {
  gen::Rng rng(8);
  const auto cases = gen::cohort(rng, 40);
  EXPECT_EQ(stratified_splits(cases, options(3, 5, 1)).mode, SplitMode::kIndependent);
  EXPECT_EQ(stratified_splits(cases, options(4, 10, 1)).mode, SplitMode::kExhaustive);
}

TEST(Splits, GreedyBeatsRandomSearchOn40Cases) {
  gen::Rng rng(40);
  const auto cases = gen::cohort(rng, 40);
  auto o = options(3, 5, 7, SplitMode::kIndependent);
  o.covariates = {"bmi"};
  const auto plan = stratified_splits(cases, o);
  const auto cols = columns(cases, {"bmi"});
  const double best = oracle::best_random_score(cols, 40, 3, 5, false, 10000, 1);
  // Both sides scored by the same oracle arithmetic.
  const double greedy = oracle::balance_score(cols, test_indices(plan, cases));
  EXPECT_NEAR(greedy, plan.balance_score, 1e-12);
  EXPECT_LE(greedy, best);
}

TEST(SeededRng, StandardEngineAndBounds) {
  SeededRng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  EXPECT_EQ(v, 9981545732273789042ULL);
  SeededRng r(1);
  for (int i = 0; i < 1000; ++i) {
    const auto b = static_cast<std::uint64_t>(i % 17 + 1);
    EXPECT_LT(r.below(b), b);
  }
}

}  // namespace
}  // namespace phaseforge
