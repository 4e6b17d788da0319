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

#include "phaseforge/stream_replay.hpp"

#include <algorithm>

#include "phaseforge/error.hpp"

namespace phaseforge {

StreamReplayer::StreamReplayer(ReplayPolicy policy,
                               std::vector<PhaseId> column_phase_ids)
    : policy_(policy), column_ids_(std::move(column_phase_ids)) {
  if (policy_.window == 0) {
    throw Error(ErrorCode::kInvalidArgument, "replay window must be >= 1");
  }
  if (column_ids_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "replay needs at least one phase");
  }
}

std::optional<Decision> StreamReplayer::push(std::span<const double> row) {
  if (row.size() != column_ids_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "row has " + std::to_string(row.size()) + " values, expected " +
                    std::to_string(column_ids_.size()));
  }
  const auto frame = static_cast<std::int64_t>(frames_seen_++);
  buffer_.emplace_back(row.begin(), row.end());
  if (buffer_.size() > policy_.window) buffer_.pop_front();
  peak_ = std::max(peak_, buffer_.size());

  // Both modes hold the same per-frame confidences, so they decide on the
  // same frames; they differ in what the warmup models (queued features vs a
  // clip being filled), not in the labels produced.
  if (buffer_.size() < policy_.window) {
    if (policy_.warmup_emission == WarmupEmission::kSuppress) {
      return std::nullopt;
    }
    return Decision{frame, FrameState::kWarmup, kBlank};
  }
  return Decision{frame, FrameState::kDecided,
                  column_ids_[argmax_column(buffer_.back())]};
}

DecisionTrack replay(const PredictionLog& log, const ReplayPolicy& policy) {
  if (policy.window == 0) {
    throw Error(ErrorCode::kInvalidArgument, "replay window must be >= 1");
  }
  if (log.num_frames() < policy.window) {
    throw Error(ErrorCode::kLogTooShort,
                "log has " + std::to_string(log.num_frames()) +
                    " rows, window needs " + std::to_string(policy.window));
  }
  StreamReplayer replayer(policy, log.column_phase_ids());
  DecisionTrack out;
  out.frame_offset = log.frame_offset();
  out.track.case_id = log.case_id();
  out.track.annotator_id = "replay";
  out.track.provenance = TrackProvenance::kDecision;
  out.track.labels.assign(log.num_frames(), kBlank);
  out.states.assign(log.num_frames(), FrameState::kWarmup);
  for (std::size_t i = 0; i < log.num_frames(); ++i) {
    if (auto d = replayer.push(log.row(i))) {
      const auto idx = static_cast<std::size_t>(d->frame);
      out.track.labels[idx] = d->label;
      out.states[idx] = d->state;
    }
  }
  out.peak_buffered_rows = replayer.peak_buffered_rows();
  return out;
}

DivergenceReport compare_offline(const DecisionTrack& decisions,
                                 const PredictionLog& log) {
  if (decisions.track.size() != log.num_frames() ||
      decisions.states.size() != log.num_frames() ||
      decisions.frame_offset != log.frame_offset()) {
    throw Error(ErrorCode::kLengthMismatch,
                "decision track is not aligned with the prediction log");
  }
  DivergenceReport report;
  for (std::size_t i = 0; i < log.num_frames(); ++i) {
    if (decisions.states[i] != FrameState::kDecided) continue;
    const Label offline = log.column_phase_ids()[argmax_column(log.row(i))];
    if (decisions.track.labels[i] != offline) {
      if (report.diff_count++ == 0) {
        report.first_diff_frame = log.frame_offset() + static_cast<std::int64_t>(i);
      }
    }
  }
  return report;
}

}  // namespace phaseforge
