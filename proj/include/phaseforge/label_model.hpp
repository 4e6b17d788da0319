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

// Temporal label types shared by every other module: phase taxonomies,
// per-frame tracks and their run-length segment form.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phaseforge {

using PhaseId = int;

// A per-frame label. std::nullopt is BLANK, the "no label" state left behind
// by the unanimity merge.
using Label = std::optional<PhaseId>;
inline constexpr Label kBlank = std::nullopt;

enum class SurgeryKind { kCholecystectomy, kGastrectomy, kCustom };
enum class PhaseKind { kSurgical, kNonSurgical };

struct Phase {
  PhaseId id = 0;
  std::string name;
  PhaseKind kind = PhaseKind::kSurgical;

  friend bool operator==(const Phase&, const Phase&) = default;
};

class PhaseTaxonomy {
 public:
  // Throws kInvalidArgument when the phase list is empty, ids repeat, or a
  // builtin surgery kind does not have its canonical id layout.
  PhaseTaxonomy(SurgeryKind kind, std::vector<Phase> phases);

  SurgeryKind surgery_kind() const { return kind_; }
  const std::vector<Phase>& phases() const { return phases_; }
  std::size_t size() const { return phases_.size(); }

  bool contains(PhaseId id) const { return index_of(id).has_value(); }
  // Position of `id` in the ordered phase list. Prediction columns follow
  // this order.
  std::optional<std::size_t> index_of(PhaseId id) const;
  const Phase& phase(PhaseId id) const;
  std::vector<PhaseId> ids() const;

  friend bool operator==(const PhaseTaxonomy&, const PhaseTaxonomy&) = default;

 private:
  SurgeryKind kind_;
  std::vector<Phase> phases_;
};

// Seven phases, ids 0..6.
const PhaseTaxonomy& cholecystectomy_taxonomy();
// Twenty-seven phases, ids 1..27; 22..27 are non-surgical.
const PhaseTaxonomy& gastrectomy_taxonomy();
// Accepts "cholec", "cholecystectomy", "gastrectomy". Throws kNotFound.
const PhaseTaxonomy& builtin_taxonomy(std::string_view name);

std::string_view surgery_kind_name(SurgeryKind kind);
std::optional<SurgeryKind> parse_surgery_kind(std::string_view name);

// Frames per second as a positive rational.
struct FrameRate {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const FrameRate&, const FrameRate&) = default;
};

enum class TrackProvenance {
  kAnnotator,  // one human annotation; BLANK is illegal
  kDraft,      // unanimity-merge output; BLANK marks disagreement
  kResolved,   // draft completed by an inspector
  kDecision,   // replayed model decisions; BLANK marks warmup frames
};

struct FrameTrack {
  std::string case_id;
  std::string annotator_id;
  FrameRate fps;
  TrackProvenance provenance = TrackProvenance::kAnnotator;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
  bool has_blank() const;

  friend bool operator==(const FrameTrack&, const FrameTrack&) = default;
};

// Inclusive frame range [start_frame, end_frame] carrying one label.
struct Segment {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  Label label;

  std::int64_t length() const { return end_frame - start_frame + 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentTrack {
  std::string case_id;
  std::string annotator_id;
  FrameRate fps;
  TrackProvenance provenance = TrackProvenance::kAnnotator;
  std::vector<Segment> segments;

  friend bool operator==(const SegmentTrack&, const SegmentTrack&) = default;
};

enum class IssueCode { kUnknownLabel, kUnexpectedBlank, kLengthMismatch };

struct ValidationIssue {
  std::size_t frame_index = 0;
  IssueCode code = IssueCode::kUnknownLabel;
  std::string detail;

  friend bool operator==(const ValidationIssue&,
                         const ValidationIssue&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  friend bool operator==(const ValidationReport&,
                         const ValidationReport&) = default;
};

std::string_view issue_code_name(IssueCode code);

// Lists every frame whose label is outside the taxonomy or is BLANK where the
// provenance forbids it. With `expected_frames`, a length difference is
// reported as one kLengthMismatch issue. Never throws on bad labels.
ValidationReport validate_track(
    const FrameTrack& track, const PhaseTaxonomy& taxonomy,
    std::optional<std::size_t> expected_frames = std::nullopt);

// Maximal runs. Throws kEmptyTrack.
SegmentTrack to_segments(const FrameTrack& track);

// Throws kMalformedSegments unless the segments start at 0, are gap-free and
// non-overlapping, and have end >= start.
FrameTrack to_frames(const SegmentTrack& segments);

// Structural check of SegmentTrack invariants, including maximal runs.
bool segments_well_formed(const SegmentTrack& segments);

// Indices k >= 1 with labels[k] != labels[k-1]. Throws kBlankInTrack.
std::vector<std::size_t> transitions(const FrameTrack& track);

// Run-length encodes labels[first..last] (inclusive) with absolute frame
// indices.
std::vector<Segment> runs(const std::vector<Label>& labels, std::size_t first,
                          std::size_t last);

}  // namespace phaseforge
