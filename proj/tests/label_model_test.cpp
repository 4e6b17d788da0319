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

#include "phaseforge/error.hpp"
#include "phaseforge/label_model.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace phaseforge {
namespace {

FrameTrack make(std::vector<Label> labels) { return gen::track("c", "a", std::move(labels)); }

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    FAIL() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(Taxonomy, BuiltinCholecystectomy) {
  const auto& t = cholecystectomy_taxonomy();
  EXPECT_EQ(t.size(), 7u);
  EXPECT_EQ(t.ids(), (std::vector<PhaseId>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(t.phase(0).name, "preparation");
  EXPECT_EQ(t.surgery_kind(), SurgeryKind::kCholecystectomy);
}

TEST(Taxonomy, BuiltinGastrectomy) {
  const auto& t = gastrectomy_taxonomy();
  ASSERT_EQ(t.size(), 27u);
  EXPECT_EQ(t.phase(18).name, "Gastric transection");
  for (PhaseId id = 1; id <= 27; ++id) {
    EXPECT_EQ(t.phase(id).kind, id >= 22 ? PhaseKind::kNonSurgical : PhaseKind::kSurgical);
  }
  EXPECT_FALSE(t.contains(0));
}

TEST(Taxonomy, RejectsBadLayouts) {
  expect_code(ErrorCode::kInvalidArgument, [] { PhaseTaxonomy(SurgeryKind::kCustom, {}); });
  expect_code(ErrorCode::kInvalidArgument, [] {
    PhaseTaxonomy(SurgeryKind::kCustom, {{1, "a", PhaseKind::kSurgical}, {1, "b", PhaseKind::kSurgical}});
  });
  expect_code(ErrorCode::kInvalidArgument, [] {
    PhaseTaxonomy(SurgeryKind::kCholecystectomy, {{0, "only", PhaseKind::kSurgical}});
  });
  PhaseTaxonomy custom(SurgeryKind::kCustom, {{10, "x", PhaseKind::kSurgical}, {3, "y", PhaseKind::kNonSurgical}});
  EXPECT_EQ(custom.index_of(3), 1u);
  expect_code(ErrorCode::kUnknownPhase, [&] { custom.phase(4); });
}

TEST(Taxonomy, BuiltinByName) {
  EXPECT_EQ(&builtin_taxonomy("cholec"), &cholecystectomy_taxonomy());
  EXPECT_EQ(&builtin_taxonomy("gastrectomy"), &gastrectomy_taxonomy());
  expect_code(ErrorCode::kNotFound, [] { builtin_taxonomy("hernia"); });
}

TEST(Validate, AllInRange) {
  EXPECT_TRUE(validate_track(make({0, 1, 2}), cholecystectomy_taxonomy()).ok);
}

TEST(Validate, UnknownLabel) {
  const auto r = validate_track(make({0, 9}), cholecystectomy_taxonomy());
  EXPECT_FALSE(r.ok);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].frame_index, 1u);
  EXPECT_EQ(r.issues[0].code, IssueCode::kUnknownLabel);
}

TEST(Validate, BlankPolicyFollowsProvenance) {
  auto t = make({0, kBlank, 1});
  auto r = validate_track(t, cholecystectomy_taxonomy());
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].code, IssueCode::kUnexpectedBlank);
  t.provenance = TrackProvenance::kDraft;
  EXPECT_TRUE(validate_track(t, cholecystectomy_taxonomy()).ok);
}

TEST(Validate, LengthMismatchIsOneIssue) {
  const auto r = validate_track(make({0, 1}), cholecystectomy_taxonomy(), 3);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].code, IssueCode::kLengthMismatch);
}

TEST(Validate, RandomGastrectomyTracksPassAndArePure) {
  gen::Rng rng(11);
  const auto& tax = gastrectomy_taxonomy();
  for (int i = 0; i < 20; ++i) {
    std::vector<Label> labels(1000);
    for (auto& l : labels) l = static_cast<PhaseId>(gen::uniform(rng, 1, 27));
    const auto t = make(labels);
    const auto r1 = validate_track(t, tax);
    EXPECT_TRUE(r1.ok);
    EXPECT_EQ(r1, validate_track(t, tax));
    // Brute-force rescan agrees.
    bool all_in = true;
    for (const auto& l : t.labels) all_in = all_in && *l >= 1 && *l <= 27;
    EXPECT_EQ(all_in, r1.ok);
  }
}

TEST(Validate, ReportsEveryBadFrame) {
  gen::Rng rng(12);
  std::vector<Label> labels(500);
  std::size_t bad = 0;
  for (auto& l : labels) {
    l = static_cast<PhaseId>(gen::uniform(rng, 0, 9));
    if (*l > 6) ++bad;
  }
  const auto r = validate_track(make(labels), cholecystectomy_taxonomy());
  EXPECT_EQ(r.issues.size(), bad);
  EXPECT_EQ(r.ok, bad == 0);
}

TEST(Segments, TwoRuns) {
  const auto s = to_segments(make({0, 0, 1, 1, 1}));
  ASSERT_EQ(s.segments.size(), 2u);
  EXPECT_EQ(s.segments[0], (Segment{0, 1, 0}));
  EXPECT_EQ(s.segments[1], (Segment{2, 4, 1}));
}

TEST(Segments, Singleton) {
  const auto s = to_segments(make({5}));
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_EQ(s.segments[0], (Segment{0, 0, 5}));
}

TEST(Segments, EmptyTrackThrows) {
  expect_code(ErrorCode::kEmptyTrack, [] { to_segments(make({})); });
}

TEST(Segments, BlankRunsAreSegmentsToo) {
  const auto s = to_segments(make({0, kBlank, kBlank, 1}));
  ASSERT_EQ(s.segments.size(), 3u);
  EXPECT_EQ(s.segments[1], (Segment{1, 2, kBlank}));
}

TEST(Frames, FromSegments) {
  SegmentTrack s;
  s.segments = {{0, 2, 3}};
  EXPECT_EQ(to_frames(s).labels, (std::vector<Label>{3, 3, 3}));
  s.segments = {{0, 0, 1}, {1, 1, 2}};
  EXPECT_EQ(to_frames(s).labels, (std::vector<Label>{1, 2}));
}

TEST(Frames, MalformedSegments) {
  SegmentTrack s;
  s.segments = {{0, 1, 0}, {3, 4, 1}};  // gap
  expect_code(ErrorCode::kMalformedSegments, [&] { to_frames(s); });
  s.segments = {{0, 2, 0}, {2, 4, 1}};  // overlap
  expect_code(ErrorCode::kMalformedSegments, [&] { to_frames(s); });
  s.segments = {{1, 2, 0}};  // does not start at 0
  expect_code(ErrorCode::kMalformedSegments, [&] { to_frames(s); });
  s.segments = {{0, -1, 0}};
  expect_code(ErrorCode::kMalformedSegments, [&] { to_frames(s); });
}

TEST(Frames, WellFormedRequiresMaximalRuns) {
  SegmentTrack s;
  s.segments = {{0, 1, 0}, {2, 3, 0}};
  EXPECT_FALSE(segments_well_formed(s));
  s.segments = {{0, 1, 0}, {2, 3, 1}};
  EXPECT_TRUE(segments_well_formed(s));
}

TEST(Transitions, Examples) {
  EXPECT_TRUE(transitions(make({0, 0, 0})).empty());
  EXPECT_EQ(transitions(make({0, 0, 1, 1, 2})), (std::vector<std::size_t>{2, 4}));
  expect_code(ErrorCode::kBlankInTrack, [] { transitions(make({0, kBlank})); });
}

TEST(Properties, RleRoundTripAndCounts) {
  gen::Rng rng(2024);
  const PhaseTaxonomy* taxes[] = {&cholecystectomy_taxonomy(), &gastrectomy_taxonomy()};
  for (int i = 0; i < 1000; ++i) {
    const auto& tax = *taxes[i % 2];
    const std::size_t n = gen::uniform(rng, 1, 400);
    const auto t = make(gen::run_labels(rng, tax, n, gen::uniform(rng, 1, 30)));
    const auto s = to_segments(t);
    ASSERT_TRUE(segments_well_formed(s));
    ASSERT_EQ(to_frames(s).labels, t.labels);
    ASSERT_EQ(s.segments.size(), oracle::label_changes(t.labels) + 1);
    ASSERT_EQ(transitions(t).size() + 1, s.segments.size());
  }
}

TEST(Properties, LongTrackSegmentCount) {
  gen::Rng rng(7);
  std::vector<Label> labels(10000);
  for (auto& l : labels) l = static_cast<PhaseId>(gen::uniform(rng, 0, 2));
  const auto t = make(labels);
  EXPECT_EQ(to_segments(t).segments.size(), oracle::label_changes(labels) + 1);
}

TEST(Runs, SubRange) {
  const std::vector<Label> labels{0, 0, 1, 1, 2, 2};
  const auto r = runs(labels, 1, 4);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], (Segment{1, 1, 0}));
  EXPECT_EQ(r[2], (Segment{4, 4, 2}));
}

}  // namespace
}  // namespace phaseforge
