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

// Unanimity merge of annotator tracks, blank-segment extraction, inspector
// resolution and agreement analytics.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaseforge/label_model.hpp"

namespace phaseforge {

enum class FrameOrigin { kAgreed, kBlank };

struct ConsensusDraft {
  std::string case_id;
  std::vector<std::string> source_annotators;
  FrameTrack merged;  // provenance kDraft
  std::vector<FrameOrigin> frame_provenance;
  // Input tracks in merge order. Empty when the draft was loaded from a file;
  // blank segments then carry no evidence.
  std::vector<FrameTrack> sources;

  friend bool operator==(const ConsensusDraft&, const ConsensusDraft&) = default;
};

// What one annotator said over a blank range, run-length encoded.
struct AnnotatorEvidence {
  std::string annotator_id;
  std::vector<Segment> runs;

  friend bool operator==(const AnnotatorEvidence&,
                         const AnnotatorEvidence&) = default;
};

struct BlankSegment {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  std::vector<AnnotatorEvidence> evidence;

  friend bool operator==(const BlankSegment&, const BlankSegment&) = default;
};

using UtcTime = std::chrono::sys_seconds;

struct Resolution {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  PhaseId assigned_label = 0;
  std::string inspector_id;
  UtcTime timestamp{};
  std::string note;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct ResolutionLedger {
  std::vector<Resolution> entries;

  friend bool operator==(const ResolutionLedger&,
                         const ResolutionLedger&) = default;
};

struct ResolvedTrack {
  FrameTrack track;  // provenance kResolved when complete, kDraft otherwise
  bool complete = false;
  std::vector<Segment> residual_blanks;
};

struct AgreementStats {
  std::vector<std::string> annotators;
  std::vector<std::vector<double>> pairwise;
  double unanimity_coverage = 0.0;
};

struct BoundaryBin {
  std::uint64_t frames_at_distance = 0;
  std::uint64_t disagreeing_frames = 0;

  friend bool operator==(const BoundaryBin&, const BoundaryBin&) = default;
};

struct BoundaryProfile {
  std::int64_t max_distance = 0;
  std::vector<BoundaryBin> bins;  // index = distance, size max_distance + 1
};

inline constexpr std::int64_t kDefaultBoundaryCap = 120;

// merged[k] is the common label where all tracks agree and BLANK otherwise.
// Throws kNotEnoughAnnotators, kLengthMismatch, kCaseMismatch, kBlankInTrack.
ConsensusDraft and_merge(std::span<const FrameTrack> tracks);

// Rebuilds a draft from a merged track (e.g. a draft CSV). No evidence.
ConsensusDraft draft_from_merged(FrameTrack merged);

// Maximal BLANK runs in ascending order, with per-annotator evidence.
std::vector<BlankSegment> blank_segments(const ConsensusDraft& draft);

// Throws kMalformedLedger when entries overlap or have end < start, and
// kUnknownPhase when a taxonomy is given and a label is outside it.
void validate_ledger(const ResolutionLedger& ledger,
                     const PhaseTaxonomy* taxonomy = nullptr);

// Fills ledger ranges into the draft's BLANK frames. Throws
// kResolutionOverreach when an entry touches an agreed frame or lies outside
// the track. Residual BLANK frames are reported, not thrown.
ResolvedTrack apply_resolutions(const ConsensusDraft& draft,
                                const ResolutionLedger& ledger);

// Same preconditions and errors as and_merge.
AgreementStats pairwise_agreement(std::span<const FrameTrack> tracks);

// Bins every frame by its distance to the nearest reference transition,
// capped at max_distance, and counts frames where some other track disagrees
// with the reference.
BoundaryProfile boundary_disagreement_profile(
    const FrameTrack& reference, std::span<const FrameTrack> others,
    std::int64_t max_distance = kDefaultBoundaryCap);

}  // namespace phaseforge
