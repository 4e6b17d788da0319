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

#include <atomic>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "phaseforge/formats.hpp"
#include "phaseforge/service.hpp"
#include "support/generators.hpp"

namespace phaseforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kCases = "/api/projects/p/cases";

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("pf_service_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    store_ = std::make_unique<ProjectStore>(root_);
    service_ = std::make_unique<InspectorService>(*store_);
  }
  void TearDown() override { fs::remove_all(root_); }

  ServiceResponse call(const std::string& method, const std::string& path,
                       const std::string& body = "",
                       std::map<std::string, std::string> query = {}) {
    return service_->handle({method, path, std::move(query), body, ""});
  }
  static json body(const ServiceResponse& r) { return json::parse(r.body); }

  void make_project(const std::string& taxonomy = "cholec") {
    ASSERT_EQ(call("POST", "/api/projects", json{{"project_id", "p"}, {"taxonomy", taxonomy}}.dump()).status, 201);
  }
  void make_case(const std::string& id, std::size_t frames) {
    CaseManifest m;
    m.case_id = id;
    m.frame_count = frames;
    m.metadata.case_id = id;
    ASSERT_EQ(call("POST", kCases, write_manifest_json(m)).status, 201);
  }
  ServiceResponse put(const std::string& c, const FrameTrack& t) {
    return call("PUT", kCases + "/" + c + "/tracks/" + t.annotator_id, write_track_csv(t));
  }
  static std::vector<Label> fill(std::initializer_list<std::pair<std::size_t, PhaseId>> runs) {
    std::vector<Label> out;
    for (auto [n, id] : runs) out.insert(out.end(), n, id);
    return out;
  }
  // 200 frames; the two annotators disagree on [100,150] only.
  void disputed_case() {
    make_project();
    make_case("c1", 200);
    ASSERT_EQ(put("c1", gen::track("c1", "ann1", fill({{100, 1}, {51, 2}, {49, 3}}))).status, 201);
    ASSERT_EQ(put("c1", gen::track("c1", "ann2", fill({{100, 1}, {51, 3}, {49, 3}}))).status, 201);
    ASSERT_EQ(call("POST", kCases + "/c1/consensus").status, 201);
  }
  static json resolution(std::int64_t s, std::int64_t e, PhaseId label,
                         const std::string& id = "") {
    json j{{"start_frame", s}, {"end_frame", e}, {"label", label}, {"inspector_id", "insp"},
           {"timestamp", "2026-01-02T03:04:05Z"}};
    if (!id.empty()) j["submission_id"] = id;
    return j;
  }

  fs::path root_;
  std::unique_ptr<ProjectStore> store_;
  std::unique_ptr<InspectorService> service_;
};

TEST_F(ServiceTest, ProjectsAndCases) {
  make_project();
  EXPECT_EQ(call("POST", "/api/projects", json{{"project_id", "p"}, {"taxonomy", "cholec"}}.dump()).status, 200);
  EXPECT_EQ(call("POST", "/api/projects", json{{"project_id", "p"}, {"taxonomy", "gastrectomy"}}.dump()).status, 409);
  EXPECT_EQ(call("POST", "/api/projects", "{not json").status, 400);
  EXPECT_EQ(call("POST", "/api/projects", json{{"project_id", "../x"}}.dump()).status, 400);
  EXPECT_EQ(body(call("GET", "/api/projects")), json::array({"p"}));
  make_case("c1", 10);
  EXPECT_EQ(body(call("GET", kCases)), json::array({"c1"}));
  EXPECT_EQ(call("GET", "/api/projects/nope/cases").status, 404);
  EXPECT_EQ(call("GET", kCases + "/c9/blanks").status, 404);
  EXPECT_EQ(call("DELETE", kCases).status, 405);
  EXPECT_EQ(call("GET", "/api/unknown").status, 404);
  EXPECT_EQ(body(call("GET", "/api/spec"))["openapi"], "3.0.3");
}

TEST_F(ServiceTest, TrackUploadValidates) {
  make_project();
  make_case("c1", 4);
  const auto t = gen::track("c1", "ann1", fill({{4, 2}}));
  EXPECT_EQ(put("c1", t).status, 201);
  EXPECT_EQ(put("c1", t).status, 200);
  auto wrong_length = put("c1", gen::track("c1", "ann1", fill({{5, 2}})));
  EXPECT_EQ(wrong_length.status, 422);
  EXPECT_FALSE(body(wrong_length)["report"]["ok"].get<bool>());
  EXPECT_EQ(put("c1", gen::track("c1", "ann1", fill({{4, 9}}))).status, 422);
  EXPECT_EQ(put("c1", gen::track("c1", "consensus", fill({{4, 2}}))).status, 400);
  // Malformed CSV (frame index gap) is a bad request, not a validation report.
  auto gap = call("PUT", kCases + "/c1/tracks/ann2", "frame,phase\n1,2\n");
  EXPECT_EQ(gap.status, 400);
  EXPECT_EQ(body(gap)["code"], "DenseIndexViolation");
  auto lone = call("POST", kCases + "/c1/consensus");
  EXPECT_EQ(lone.status, 422);
  EXPECT_EQ(body(lone)["code"], "NotEnoughAnnotators");
}

TEST_F(ServiceTest, ConsensusAndBlanks) {
  disputed_case();
  auto again = call("POST", kCases + "/c1/consensus");
  EXPECT_EQ(again.status, 200);
  EXPECT_EQ(body(again)["blank_segments"], 1);
  auto blanks = body(call("GET", kCases + "/c1/blanks"));
  ASSERT_EQ(blanks.size(), 1u);
  EXPECT_EQ(blanks[0]["start_frame"], 100);
  EXPECT_EQ(blanks[0]["end_frame"], 150);
  ASSERT_EQ(blanks[0]["evidence"].size(), 2u);
  EXPECT_EQ(blanks[0]["evidence"][0]["runs"][0]["label"], 2);
  EXPECT_EQ(blanks[0]["evidence"][1]["runs"][0]["label"], 3);
}

TEST_F(ServiceTest, FullResolutionClearsSegment) {
  disputed_case();
  auto r = call("POST", kCases + "/c1/resolutions", resolution(100, 150, 2).dump());
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(body(r)["pending"].empty());
  auto exported = call("GET", kCases + "/c1/export");
  ASSERT_EQ(exported.status, 200);
  EXPECT_EQ(exported.content_type, "text/csv");
  const auto final_track = parse_track_csv(exported.body, "c1", "consensus");
  EXPECT_TRUE(validate_track(final_track, cholecystectomy_taxonomy(), 200).ok);
  EXPECT_EQ(final_track.labels, fill({{100, 1}, {51, 2}, {49, 3}}));
}

TEST_F(ServiceTest, PartialResolutionLeavesRemainder) {
  disputed_case();
  auto r = call("POST", kCases + "/c1/resolutions", resolution(100, 120, 2).dump());
  ASSERT_EQ(r.status, 200);
  const auto pending = body(r)["pending"];
  ASSERT_EQ(pending.size(), 1u);
  EXPECT_EQ(pending[0]["start_frame"], 121);
  EXPECT_EQ(pending[0]["end_frame"], 150);
  auto exported = call("GET", kCases + "/c1/export");
  EXPECT_EQ(exported.status, 409);
  EXPECT_EQ(body(exported)["remaining_blanks"][0]["start_frame"], 121);
  auto ledger = body(call("GET", kCases + "/c1/resolutions"));
  ASSERT_EQ(ledger["entries"].size(), 1u);
  EXPECT_EQ(ledger["entries"][0]["inspector_id"], "insp");
}

TEST_F(ServiceTest, SubmissionErrors) {
  disputed_case();
  const std::string path = kCases + "/c1/resolutions";
  EXPECT_EQ(call("POST", path, resolution(100, 110, 42).dump()).status, 422);
  EXPECT_EQ(call("POST", path, resolution(90, 110, 2).dump()).status, 409);
  EXPECT_EQ(call("POST", path, resolution(110, 100, 2).dump()).status, 409);
  EXPECT_EQ(call("POST", path, json{{"start_frame", 100}}.dump()).status, 400);
  ASSERT_EQ(call("POST", path, resolution(100, 110, 2, "s1").dump()).status, 200);
  // Retry is idempotent, reuse with another payload is a conflict.
  EXPECT_EQ(call("POST", path, resolution(100, 110, 2, "s1").dump()).status, 200);
  EXPECT_EQ(call("POST", path, resolution(111, 120, 2, "s1").dump()).status, 409);
  // Resolved frames are no longer pending.
  EXPECT_EQ(call("POST", path, resolution(105, 115, 2, "s2").dump()).status, 409);
  EXPECT_EQ(service_->ledger("p", "c1").entries.size(), 1u);
  // Retry without an id derives the same id from the payload.
  EXPECT_EQ(call("POST", path, resolution(111, 120, 4).dump()).status, 200);
  EXPECT_EQ(call("POST", path, resolution(111, 120, 4).dump()).status, 200);
  EXPECT_EQ(service_->ledger("p", "c1").entries.size(), 2u);
}

TEST_F(ServiceTest, RemergeNeedsForceOnceResolved) {
  disputed_case();
  ASSERT_EQ(call("POST", kCases + "/c1/resolutions", resolution(100, 110, 2).dump()).status, 200);
  ASSERT_EQ(put("c1", gen::track("c1", "ann3", fill({{200, 1}}))).status, 201);
  EXPECT_EQ(call("POST", kCases + "/c1/consensus").status, 409);
  auto forced = call("POST", kCases + "/c1/consensus", "", {{"force", "true"}});
  ASSERT_EQ(forced.status, 201);
  EXPECT_EQ(body(forced)["draft_version"], 2);
  EXPECT_TRUE(service_->ledger("p", "c1").entries.empty());
}

TEST_F(ServiceTest, StateReplaysFromStore) {
  disputed_case();
  ASSERT_EQ(call("POST", kCases + "/c1/resolutions", resolution(130, 150, 3, "a").dump()).status, 200);
  ASSERT_EQ(call("POST", kCases + "/c1/resolutions", resolution(100, 105, 2, "b").dump()).status, 200);
  const auto pending = service_->pending_blanks("p", "c1");
  const auto ledger = service_->ledger("p", "c1");

  InspectorService fresh(*store_);
  EXPECT_EQ(fresh.pending_blanks("p", "c1"), pending);
  EXPECT_EQ(fresh.ledger("p", "c1"), ledger);
  EXPECT_EQ(fresh.draft("p", "c1"), service_->draft("p", "c1"));
  // The replayed submission ids still deduplicate.
  auto retry = fresh.handle({"POST", kCases + "/c1/resolutions", {},
                             resolution(130, 150, 3, "a").dump(), ""});
  EXPECT_EQ(retry.status, 200);
  EXPECT_EQ(fresh.ledger("p", "c1").entries.size(), 2u);
}

TEST_F(ServiceTest, ConflictingConcurrentSubmissionsOneWins) {
  disputed_case();
  constexpr int kThreads = 8;
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      auto r = call("POST", kCases + "/c1/resolutions",
                    resolution(100 + t, 150, 2, "t" + std::to_string(t)).dump());
      (r.status == 200 ? ok : conflict)++;
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok.load() + conflict.load(), kThreads);
  // Each accepted range must have been pending when it was applied, so the
  // ranges cannot overlap; every request covers frame 150, so exactly one wins.
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(service_->ledger("p", "c1").entries.size(), 1u);
}

TEST_F(ServiceTest, RandomSequencesMatchBatchResolution) {
  gen::Rng rng(20261016);
  make_project();
  for (int trial = 0; trial < 25; ++trial) {
    const std::string c = "r" + std::to_string(trial);
    const std::size_t frames = gen::uniform(rng, 50, 400);
    make_case(c, frames);
    auto tracks = gen::annotator_tracks(rng, cholecystectomy_taxonomy(),
                                        gen::uniform(rng, 2, 4), frames, c);
    for (const auto& t : tracks) ASSERT_LT(put(c, t).status, 300);
    ASSERT_LT(call("POST", kCases + "/" + c + "/consensus").status, 300);
    const auto draft = and_merge(tracks);

    ResolutionLedger accepted;
    for (int step = 0; step < 40; ++step) {
      const auto pending = service_->pending_blanks("p", c);
      if (pending.empty()) break;
      // Mix valid sub-ranges with ranges that spill over agreed frames.
      const auto& seg = pending[gen::uniform(rng, 0, pending.size() - 1)];
      std::int64_t s = seg.start_frame + static_cast<std::int64_t>(
                                             gen::uniform(rng, 0, seg.end_frame - seg.start_frame));
      std::int64_t e = s + static_cast<std::int64_t>(gen::uniform(rng, 0, seg.end_frame - s));
      if (gen::uniform(rng, 0, 4) == 0) e = seg.end_frame + 1;
      const PhaseId label = gen::pick_phase(rng, cholecystectomy_taxonomy());
      auto r = call("POST", kCases + "/" + c + "/resolutions", resolution(s, e, label).dump());
      if (e > seg.end_frame) {
        EXPECT_EQ(r.status, 409);
        continue;
      }
      ASSERT_EQ(r.status, 200) << r.body;
      Resolution entry;
      entry.start_frame = s;
      entry.end_frame = e;
      entry.assigned_label = label;
      entry.inspector_id = "insp";
      entry.timestamp = parse_utc("2026-01-02T03:04:05Z");
      accepted.entries.push_back(entry);
    }
    EXPECT_EQ(service_->ledger("p", c), accepted);
    const auto batch = apply_resolutions(draft, accepted);
    std::vector<Segment> served;
    for (const auto& b : service_->pending_blanks("p", c)) {
      served.push_back({b.start_frame, b.end_frame, kBlank});
    }
    EXPECT_EQ(served, batch.residual_blanks);
    auto exported = call("GET", kCases + "/" + c + "/export");
    if (batch.complete) {
      ASSERT_EQ(exported.status, 200);
      EXPECT_EQ(parse_track_csv(exported.body).labels, batch.track.labels);
    } else {
      EXPECT_EQ(exported.status, 409);
    }
  }
}

TEST_F(ServiceTest, StatsAndEvaluate) {
  disputed_case();
  auto stats = call("GET", kCases + "/c1/stats", "", {{"reference", "ann2"}, {"max_distance", "10"}});
  ASSERT_EQ(stats.status, 200) << stats.body;
  const auto j = body(stats);
  EXPECT_EQ(j["reference"], "ann2");
  EXPECT_NEAR(j["agreement"]["unanimity_coverage"].get<double>(), 149.0 / 200.0, 1e-12);
  EXPECT_EQ(j["boundary"]["bins"].size(), 11u);
  EXPECT_EQ(call("GET", kCases + "/c1/stats", "", {{"reference", "zz"}}).status, 404);

  // A one-hot prediction of ann1 evaluated against ann1.
  const auto truth = fill({{100, 1}, {51, 2}, {49, 3}});
  std::vector<double> values;
  for (const auto& label : truth) {
    std::vector<double> row(7, 0.0);
    row[static_cast<std::size_t>(*label)] = 1.0;
    values.insert(values.end(), row.begin(), row.end());
  }
  const PredictionLog log("c1", 7, values);
  auto eval = call("POST", "/api/projects/p/evaluate",
                   json{{"case_id", "c1"}, {"prediction_csv", write_prediction_csv(log)},
                        {"reference", "ann1"}, {"model", "oracle"}}
                       .dump());
  ASSERT_EQ(eval.status, 200) << eval.body;
  EXPECT_NEAR(body(eval)["map"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(body(eval)["cross_entropy"].get<double>(), 0.0, 1e-12);
  // The consensus reference needs a complete resolution first.
  EXPECT_EQ(call("POST", "/api/projects/p/evaluate",
                 json{{"case_id", "c1"}, {"prediction_csv", write_prediction_csv(log)}}.dump())
                .status,
            409);
}

TEST_F(ServiceTest, BearerTokenIsChecked) {
  service_->set_authorizer([](std::string_view token) { return token == "s3cret"; });
  EXPECT_EQ(call("GET", "/api/projects").status, 401);
  EXPECT_EQ(service_->handle({"GET", "/api/projects", {}, "", "Bearer nope"}).status, 401);
  EXPECT_EQ(service_->handle({"GET", "/api/projects", {}, "", "Bearer s3cret"}).status, 200);
}

}  // namespace
}  // namespace phaseforge
