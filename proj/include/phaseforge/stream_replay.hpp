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

#pragma once

// Replays a prediction log as if frames arrived one at a time from a live
// recognizer: a warmup period while the input buffer fills, then one argmax
// decision per frame.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "phaseforge/evaluation.hpp"
#include "phaseforge/label_model.hpp"

namespace phaseforge {

inline constexpr std::size_t kDefaultReplayWindow = 16;

enum class BufferMode {
  kFeatureQueue,    // per-frame features queued; the oldest drops each step
  kFullWindowWait,  // inference starts only once the whole clip is buffered
};

enum class WarmupEmission {
  kSuppress,     // the streaming interface yields nothing during warmup
  kHoldUnknown,  // it yields an explicit warmup record per frame
};

struct ReplayPolicy {
  std::size_t window = kDefaultReplayWindow;
  BufferMode mode = BufferMode::kFeatureQueue;
  WarmupEmission warmup_emission = WarmupEmission::kSuppress;
};

enum class FrameState { kWarmup, kDecided };

struct Decision {
  std::int64_t frame = 0;
  FrameState state = FrameState::kWarmup;
  Label label;  // BLANK during warmup
};

struct DecisionTrack {
  FrameTrack track;  // provenance kDecision; labels[i] is frame offset + i
  std::int64_t frame_offset = 0;
  std::vector<FrameState> states;
  std::size_t peak_buffered_rows = 0;

  friend bool operator==(const DecisionTrack&, const DecisionTrack&) = default;
};

// Push-based replayer. Holds at most `window` rows.
class StreamReplayer {
 public:
  StreamReplayer(ReplayPolicy policy, std::vector<PhaseId> column_phase_ids);

  // Consumes the next row; throws kInvalidArgument on a width mismatch.
  std::optional<Decision> push(std::span<const double> row);

  std::size_t frames_seen() const { return frames_seen_; }
  std::size_t buffered_rows() const { return buffer_.size(); }
  std::size_t peak_buffered_rows() const { return peak_; }

 private:
  ReplayPolicy policy_;
  std::vector<PhaseId> column_ids_;
  std::deque<std::vector<double>> buffer_;
  std::size_t frames_seen_ = 0;
  std::size_t peak_ = 0;
};

// Throws kInvalidArgument for window 0 and kLogTooShort when the log has
// fewer rows than the window.
DecisionTrack replay(const PredictionLog& log, const ReplayPolicy& policy);

struct DivergenceReport {
  std::size_t diff_count = 0;
  std::optional<std::int64_t> first_diff_frame;
};

// Counts decided frames whose label differs from the offline argmax of the
// same log row. Throws kLengthMismatch.
DivergenceReport compare_offline(const DecisionTrack& decisions,
                                 const PredictionLog& log);

}  // namespace phaseforge
