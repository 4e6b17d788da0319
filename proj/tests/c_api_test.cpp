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

#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "phaseforge/phaseforge.h"

namespace {

using nlohmann::json;

struct Deleter {
  void operator()(pf_taxonomy* p) const { pf_taxonomy_free(p); }
  void operator()(pf_track* p) const { pf_track_free(p); }
  void operator()(pf_draft* p) const { pf_draft_free(p); }
  void operator()(pf_ledger* p) const { pf_ledger_free(p); }
  void operator()(pf_prediction* p) const { pf_prediction_free(p); }
};
template <class T>
using Handle = std::unique_ptr<T, Deleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  pf_string_free(s);
  return out;
}

Handle<pf_track> track(const std::string& csv, const char* annotator) {
  pf_track* t = nullptr;
  EXPECT_EQ(pf_track_parse_csv(csv.data(), csv.size(), "c1", annotator, &t), PF_OK)
      << pf_last_error_message();
  return Handle<pf_track>(t);
}

TEST(CApi, LibraryInfo) {
  EXPECT_STREQ(pf_version(), "0.1.0");
  EXPECT_STREQ(pf_status_name(PF_OK), "Ok");
  EXPECT_STREQ(pf_status_name(PF_ERR_BLANK_IN_TRACK), "BlankInTrack");
  EXPECT_TRUE(pf_status_is_input_error(PF_ERR_SCHEMA));
  EXPECT_TRUE(pf_status_is_input_error(PF_ERR_IO));
  EXPECT_FALSE(pf_status_is_input_error(PF_ERR_NOT_ENOUGH_ANNOTATORS));
  pf_string_free(nullptr);
  pf_track_free(nullptr);
}

TEST(CApi, ErrorsReportCodeAndMessage) {
  pf_track* t = nullptr;
  const std::string bad = "frame,phase\n0,1\n2,1\n";
  EXPECT_EQ(pf_track_parse_csv(bad.data(), bad.size(), "c", "a", &t), PF_ERR_DENSE_INDEX_VIOLATION);
  EXPECT_EQ(t, nullptr);
  EXPECT_GT(std::strlen(pf_last_error_message()), 0u);
  pf_taxonomy* tax = nullptr;
  EXPECT_EQ(pf_taxonomy_load("no-such-taxonomy", &tax), PF_ERR_NOT_FOUND);
  EXPECT_EQ(pf_taxonomy_load(nullptr, &tax), PF_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(pf_taxonomy_load("cholec", nullptr), PF_ERR_INVALID_ARGUMENT);
}

TEST(CApi, TrackAccessAndValidation) {
  pf_taxonomy* raw = nullptr;
  ASSERT_EQ(pf_taxonomy_load("cholec", &raw), PF_OK);
  Handle<pf_taxonomy> tax(raw);
  EXPECT_EQ(pf_taxonomy_size(tax.get()), 7u);
  char* tj = nullptr;
  ASSERT_EQ(pf_taxonomy_json(tax.get(), &tj), PF_OK);
  EXPECT_EQ(json::parse(take(tj))["phases"].size(), 7u);

  const std::string csv = "frame,phase\n0,1\n1,1\n2,9\n";
  auto t = track(csv, "ann1");
  EXPECT_EQ(pf_track_length(t.get()), 3u);
  int label = -1, blank = -1;
  ASSERT_EQ(pf_track_label(t.get(), 2, &label, &blank), PF_OK);
  EXPECT_EQ(label, 9);
  EXPECT_EQ(blank, 0);
  EXPECT_EQ(pf_track_label(t.get(), 3, &label, &blank), PF_ERR_INVALID_ARGUMENT);
  char* out = nullptr;
  ASSERT_EQ(pf_track_write_csv(t.get(), &out), PF_OK);
  EXPECT_EQ(take(out), csv);

  int ok = -1;
  char* report = nullptr;
  ASSERT_EQ(pf_track_validate(t.get(), tax.get(), 4, &ok, &report), PF_OK);
  EXPECT_EQ(ok, 0);
  EXPECT_EQ(json::parse(take(report))["issues"].size(), 2u);
  ASSERT_EQ(pf_track_validate(t.get(), tax.get(), -1, &ok, nullptr), PF_OK);
  EXPECT_EQ(ok, 0);
}

TEST(CApi, ConsensusResolveFlow) {
  auto a = track("frame,phase\n0,0\n1,1\n2,1\n3,2\n", "ann1");
  auto b = track("frame,phase\n0,0\n1,2\n2,2\n3,2\n", "ann2");
  const pf_track* both[] = {a.get(), b.get()};
  pf_draft* raw = nullptr;
  EXPECT_EQ(pf_consensus_merge(both, 1, &raw), PF_ERR_NOT_ENOUGH_ANNOTATORS);
  ASSERT_EQ(pf_consensus_merge(both, 2, &raw), PF_OK);
  Handle<pf_draft> draft(raw);

  char* blanks = nullptr;
  ASSERT_EQ(pf_draft_blanks_json(draft.get(), &blanks), PF_OK);
  const auto bj = json::parse(take(blanks));
  ASSERT_EQ(bj.size(), 1u);
  EXPECT_EQ(bj[0]["start_frame"], 1);
  EXPECT_EQ(bj[0]["end_frame"], 2);

  pf_track* merged = nullptr;
  ASSERT_EQ(pf_draft_track(draft.get(), &merged), PF_OK);
  int label = 0, blank = 0;
  ASSERT_EQ(pf_track_label(merged, 1, &label, &blank), PF_OK);
  EXPECT_EQ(blank, 1);
  pf_track_free(merged);

  const std::string partial = R"({"entries":[{"start_frame":1,"end_frame":1,"assigned_label":1,
      "inspector_id":"i","timestamp":"2026-01-01T00:00:00Z"}]})";
  pf_ledger* lraw = nullptr;
  ASSERT_EQ(pf_ledger_parse_json(partial.data(), partial.size(), &lraw), PF_OK) << pf_last_error_message();
  Handle<pf_ledger> ledger(lraw);
  pf_track* resolved = nullptr;
  int complete = -1;
  char* residual = nullptr;
  ASSERT_EQ(pf_draft_resolve(draft.get(), ledger.get(), &resolved, &complete, &residual), PF_OK);
  EXPECT_EQ(complete, 0);
  const auto rj = json::parse(take(residual));
  ASSERT_EQ(rj.size(), 1u);
  EXPECT_EQ(rj[0]["start_frame"], 2);
  pf_track_free(resolved);

  const std::string overreach = R"({"entries":[{"start_frame":0,"end_frame":1,"assigned_label":1,
      "inspector_id":"i","timestamp":"2026-01-01T00:00:00Z"}]})";
  ASSERT_EQ(pf_ledger_parse_json(overreach.data(), overreach.size(), &lraw), PF_OK);
  Handle<pf_ledger> bad(lraw);
  EXPECT_EQ(pf_draft_resolve(draft.get(), bad.get(), &resolved, &complete, nullptr),
            PF_ERR_RESOLUTION_OVERREACH);

  char* agreement = nullptr;
  ASSERT_EQ(pf_agreement_json(both, 2, &agreement), PF_OK);
  EXPECT_DOUBLE_EQ(json::parse(take(agreement))["unanimity_coverage"].get<double>(), 0.5);
  const pf_track* others[] = {b.get()};
  char* profile = nullptr;
  ASSERT_EQ(pf_boundary_profile_json(a.get(), others, 1, 2, &profile), PF_OK);
  EXPECT_EQ(json::parse(take(profile))["bins"].size(), 3u);
}

TEST(CApi, EvaluationAndReplay) {
  pf_taxonomy* traw = nullptr;
  ASSERT_EQ(pf_taxonomy_load("cholec", &traw), PF_OK);
  Handle<pf_taxonomy> tax(traw);
  std::string csv = "frame,c0,c1,c2,c3,c4,c5,c6\n";
  std::string truth_csv = "frame,phase\n";
  for (int k = 0; k < 40; ++k) {
    const int phase = k < 20 ? 0 : 3;
    csv += std::to_string(k);
    for (int j = 0; j < 7; ++j) csv += j == phase ? ",1" : ",0";
    csv += "\n";
    truth_csv += std::to_string(k) + "," + std::to_string(phase) + "\n";
  }
  pf_prediction* praw = nullptr;
  ASSERT_EQ(pf_prediction_parse_csv(csv.data(), csv.size(), 0, "c1", &praw), PF_OK)
      << pf_last_error_message();
  Handle<pf_prediction> log(praw);
  EXPECT_EQ(pf_prediction_frames(log.get()), 40u);
  EXPECT_EQ(pf_prediction_normalized(log.get()), 1);
  auto truth = track(truth_csv, "ref");

  char* report = nullptr;
  ASSERT_EQ(pf_eval_report_json(log.get(), truth.get(), tax.get(), &report), PF_OK);
  const auto rj = json::parse(take(report));
  EXPECT_DOUBLE_EQ(rj["map"].get<double>(), 1.0);
  EXPECT_EQ(rj["absent_phases"].size(), 5u);
  double loss = -1;
  ASSERT_EQ(pf_cross_entropy(log.get(), truth.get(), tax.get(), &loss), PF_OK);
  EXPECT_EQ(loss, 0.0);

  char* decisions = nullptr;
  char* divergence = nullptr;
  ASSERT_EQ(pf_replay(log.get(), 16, PF_BUFFER_QUEUE, PF_WARMUP_SUPPRESS, &decisions, &divergence), PF_OK);
  const std::string dcsv = take(decisions);
  EXPECT_EQ(dcsv.rfind("frame,phase,state\n", 0), 0u);
  EXPECT_TRUE(json::parse(take(divergence)).is_object());
  EXPECT_EQ(pf_replay(log.get(), 41, PF_BUFFER_WAIT, PF_WARMUP_SUPPRESS, &decisions, nullptr),
            PF_ERR_LOG_TOO_SHORT);
}

TEST(CApi, DeltasFixturesAndSplits) {
  const std::string results =
      "model,split,annotation,ap\n"
      "m,s1,ann1,50.00\nm,s1,consensus,52.49\n";
  char* out = nullptr;
  ASSERT_EQ(pf_delta_table_json(results.data(), results.size(), &out), PF_OK) << pf_last_error_message();
  EXPECT_NE(take(out).find("2.49"), std::string::npos);
  ASSERT_EQ(pf_fixture_json("table2_aps", &out), PF_OK);
  EXPECT_EQ(json::parse(take(out))["name"], "table2_aps");
  EXPECT_EQ(pf_fixture_json("nope", &out), PF_ERR_NOT_FOUND);

  std::string meta = "case_id,age,operation_minutes,bleeding_ml,bmi,recording_system\n";
  for (int i = 0; i < 12; ++i) {
    meta += "c" + std::to_string(i) + "," + std::to_string(40 + i) + "," + std::to_string(200 + 7 * i) +
            "," + std::to_string(i * i) + "," + std::to_string(20 + i % 5) + (i % 2 ? ",si" : ",xi") + "\n";
  }
  pf_split_options opts;
  pf_split_options_init(&opts);
  opts.fold_count = 3;
  opts.test_size = 4;
  opts.seed = 7;
  ASSERT_EQ(pf_splits_json(meta.data(), meta.size(), &opts, &out), PF_OK) << pf_last_error_message();
  const auto plan = json::parse(take(out));
  EXPECT_EQ(plan["folds"].size(), 3u);
  opts.test_size = 13;
  EXPECT_EQ(pf_splits_json(meta.data(), meta.size(), &opts, &out), PF_ERR_TOO_FEW_CASES);
}

}  // namespace
