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
#include "phaseforge/stream_replay.hpp"
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

ReplayPolicy policy(std::size_t window, BufferMode mode,
                    WarmupEmission emission = WarmupEmission::kSuppress) {
  return {window, mode, emission};
}

TEST(Replay, ConstantRowsFavoringPhase3) {
  std::vector<double> v;
  for (int f = 0; f < 40; ++f) {
    for (int c = 0; c < 7; ++c) v.push_back(c == 3 ? 0.7 : 0.05);
  }
  const PredictionLog log("c", 7, v);
  const auto d = replay(log, policy(16, BufferMode::kFeatureQueue));
  ASSERT_EQ(d.track.size(), 40u);
  for (std::size_t k = 0; k < 40; ++k) {
    if (k < 15) {
      EXPECT_EQ(d.states[k], FrameState::kWarmup);
      EXPECT_FALSE(d.track.labels[k].has_value());
    } else {
      EXPECT_EQ(d.states[k], FrameState::kDecided);
      EXPECT_EQ(d.track.labels[k], Label(3));
    }
  }
  EXPECT_EQ(d.track.provenance, TrackProvenance::kDecision);
  EXPECT_LE(d.peak_buffered_rows, 16u);
}

TEST(Replay, WindowOneIsOfflineArgmax) {
  gen::Rng rng(1);
  const auto v = gen::confidences(rng, 50, 5, true);
  const PredictionLog log("c", 5, v);
  const auto d = replay(log, policy(1, BufferMode::kFullWindowWait));
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_EQ(d.states[k], FrameState::kDecided);
    std::vector<double> row(v.begin() + k * 5, v.begin() + (k + 1) * 5);
    EXPECT_EQ(d.track.labels[k], Label(static_cast<PhaseId>(oracle::argmax(row))));
  }
}

TEST(Replay, WindowEqualsLength) {
  gen::Rng rng(2);
  const PredictionLog log("c", 3, gen::confidences(rng, 20, 3, true));
  const auto d = replay(log, policy(20, BufferMode::kFeatureQueue));
  for (std::size_t k = 0; k < 19; ++k) EXPECT_EQ(d.states[k], FrameState::kWarmup);
  EXPECT_EQ(d.states[19], FrameState::kDecided);
  expect_code(ErrorCode::kLogTooShort, [&] { replay(log, policy(21, BufferMode::kFeatureQueue)); });
  expect_code(ErrorCode::kInvalidArgument, [&] { replay(log, policy(0, BufferMode::kFeatureQueue)); });
}

TEST(Replay, UsesTaxonomyIdsAndOffset) {
  const PredictionLog log = PredictionLog("c", 27, std::vector<double>(27 * 3, 1.0 / 27), 10)
                                .bound_to(gastrectomy_taxonomy());
  const auto d = replay(log, policy(2, BufferMode::kFeatureQueue));
  EXPECT_EQ(d.frame_offset, 10);
  EXPECT_EQ(d.track.labels[2], Label(1));
}

TEST(Replay, RandomLogsMatchOfflineOracleInBothModes) {
  gen::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = gen::uniform(rng, 16, 300);
    const std::size_t c = gen::uniform(rng, 2, 27);
    const auto v = gen::confidences(rng, n, c, i % 2 == 0, i % 3 == 0);
    const PredictionLog log("c", c, v);
    const auto queue = replay(log, policy(16, BufferMode::kFeatureQueue));
    const auto wait = replay(log, policy(16, BufferMode::kFullWindowWait, WarmupEmission::kHoldUnknown));
    ASSERT_EQ(queue.track.labels, wait.track.labels);
    ASSERT_EQ(queue.states, wait.states);
    for (std::size_t k = 15; k < n; ++k) {
      std::vector<double> row(v.begin() + k * c, v.begin() + (k + 1) * c);
      ASSERT_EQ(queue.track.labels[k], Label(static_cast<PhaseId>(oracle::argmax(row))));
    }
    ASSERT_EQ(compare_offline(queue, log).diff_count, 0u);
    ASSERT_LE(queue.peak_buffered_rows, 16u);
  }
}

TEST(Replayer, PushSemantics) {
  StreamReplayer suppress(policy(3, BufferMode::kFeatureQueue), {0, 1});
  const std::vector<double> a{0.9, 0.1}, b{0.2, 0.8};
  EXPECT_FALSE(suppress.push(a).has_value());
  EXPECT_FALSE(suppress.push(a).has_value());
  auto d = suppress.push(b);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->frame, 2);
  EXPECT_EQ(d->label, Label(1));
  for (int i = 0; i < 10; ++i) suppress.push(a);
  EXPECT_EQ(suppress.buffered_rows(), 3u);
  EXPECT_EQ(suppress.peak_buffered_rows(), 3u);

  StreamReplayer hold(policy(2, BufferMode::kFullWindowWait, WarmupEmission::kHoldUnknown), {0, 1});
  auto w = hold.push(a);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->state, FrameState::kWarmup);
  EXPECT_FALSE(w->label.has_value());
  EXPECT_EQ(hold.push(b)->state, FrameState::kDecided);
  const std::vector<double> wide{0.1, 0.2, 0.7};
  expect_code(ErrorCode::kInvalidArgument, [&] { hold.push(wide); });
}

TEST(CompareOffline, DetectsForcedError) {
  gen::Rng rng(4);
  const PredictionLog log("c", 4, gen::confidences(rng, 40, 4, true));
  auto d = replay(log, policy(16, BufferMode::kFeatureQueue));
  EXPECT_EQ(compare_offline(d, log).diff_count, 0u);
  EXPECT_FALSE(compare_offline(d, log).first_diff_frame.has_value());
  d.track.labels[20] = (*d.track.labels[20] + 1) % 4;
  const auto r = compare_offline(d, log);
  EXPECT_EQ(r.diff_count, 1u);
  EXPECT_EQ(r.first_diff_frame, 20);
  d.track.labels.pop_back();
  d.states.pop_back();
  expect_code(ErrorCode::kLengthMismatch, [&] { compare_offline(d, log); });
}

}  // namespace
}  // namespace phaseforge
