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

#include "phaseforge/label_model.hpp"

#include <algorithm>
#include <set>

#include "phaseforge/error.hpp"

namespace phaseforge {
namespace {

void check_builtin_layout(SurgeryKind kind, const std::vector<Phase>& phases) {
  if (kind == SurgeryKind::kCholecystectomy) {
    if (phases.size() != 7) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cholecystectomy taxonomy must have 7 phases");
    }
    for (std::size_t i = 0; i < phases.size(); ++i) {
      if (phases[i].id != static_cast<PhaseId>(i)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "cholecystectomy phase ids must be 0..6 in order");
      }
    }
  } else if (kind == SurgeryKind::kGastrectomy) {
    if (phases.size() != 27) {
      throw Error(ErrorCode::kInvalidArgument,
                  "gastrectomy taxonomy must have 27 phases");
    }
    for (std::size_t i = 0; i < phases.size(); ++i) {
      const PhaseId expected = static_cast<PhaseId>(i) + 1;
      const PhaseKind expected_kind =
          expected >= 22 ? PhaseKind::kNonSurgical : PhaseKind::kSurgical;
      if (phases[i].id != expected || phases[i].kind != expected_kind) {
        throw Error(ErrorCode::kInvalidArgument,
                    "gastrectomy phase ids must be 1..27 in order with "
                    "22..27 non-surgical");
      }
    }
  }
}

}  // namespace

PhaseTaxonomy::PhaseTaxonomy(SurgeryKind kind, std::vector<Phase> phases)
    : kind_(kind), phases_(std::move(phases)) {
  if (phases_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "taxonomy has no phases");
  }
  std::set<PhaseId> seen;
  for (const auto& p : phases_) {
    if (!seen.insert(p.id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate phase id " + std::to_string(p.id));
    }
  }
  check_builtin_layout(kind_, phases_);
}

std::optional<std::size_t> PhaseTaxonomy::index_of(PhaseId id) const {
  for (std::size_t i = 0; i < phases_.size(); ++i) {
    if (phases_[i].id == id) return i;
  }
  return std::nullopt;
}

const Phase& PhaseTaxonomy::phase(PhaseId id) const {
  auto idx = index_of(id);
  if (!idx) {
    throw Error(ErrorCode::kUnknownPhase,
                "phase " + std::to_string(id) + " not in taxonomy");
  }
  return phases_[*idx];
}

std::vector<PhaseId> PhaseTaxonomy::ids() const {
  std::vector<PhaseId> out;
  out.reserve(phases_.size());
  for (const auto& p : phases_) out.push_back(p.id);
  return out;
}

const PhaseTaxonomy& cholecystectomy_taxonomy() {
  static const PhaseTaxonomy taxonomy(
      SurgeryKind::kCholecystectomy,
      {
          {0, "preparation", PhaseKind::kSurgical},
          {1, "calot triangle dissection", PhaseKind::kSurgical},
          {2, "clipping and cutting", PhaseKind::kSurgical},
          {3, "gallbladder dissection", PhaseKind::kSurgical},
          {4, "gallbladder packaging", PhaseKind::kSurgical},
          {5, "cleaning and coagulation", PhaseKind::kSurgical},
          {6, "gallbladder retraction", PhaseKind::kSurgical},
      });
  return taxonomy;
}

const PhaseTaxonomy& gastrectomy_taxonomy() {
  constexpr auto S = PhaseKind::kSurgical;
  constexpr auto N = PhaseKind::kNonSurgical;
  static const PhaseTaxonomy taxonomy(
      SurgeryKind::kGastrectomy,
      {
          {1, "Trocar insertion", S},
          {2, "Docking", S},
          {3, "Division of less omentum up to the right side of the esophagus",
           S},
          {4, "Liver retraction", S},
          {5, "Partial (or total) omentectomy", S},
          {6, "Ligation of left gastroepiploic vessels", S},
          {7, "Clearance of soft tissues along the greater curvature", S},
          {8, "Ligation of Right gastroepiploic vein", S},
          {9, "Ligation of Right Gastroepiploic Artery", S},
          {10, "Creation of window for duodenal transection", S},
          {11, "Duodenal transection", S},
          {12, "Ligation of right gastric artery", S},
          {13, "Dissection of LN stations 12a", S},
          {14, "Dissection of LN station 8 and 9", S},
          {15, "Dissection of LN station 7 and ligation of left gastric artery",
           S},
          {16, "Dissection of LN station 11p", S},
          {17, "Clearance of soft tissue along the lesser curvature", S},
          {18, "Gastric transection", S},
          {19, "Harvesting resected specimen into Endo bag", S},
          {20, "Anastomosis", S},
          {21, "Retrieval of specimen", S},
          {22, "Adhesiolysis", N},
          {23, "Housekeeping", N},
          {24, "Clean camera", N},
          {25, "Junk", N},
          {26, "Other procedure", N},
          {27, "Unexpected surgical events", N},
      });
  return taxonomy;
}

const PhaseTaxonomy& builtin_taxonomy(std::string_view name) {
  if (name == "cholec" || name == "cholecystectomy") {
    return cholecystectomy_taxonomy();
  }
  if (name == "gastrectomy" || name == "gastric") {
    return gastrectomy_taxonomy();
  }
  throw Error(ErrorCode::kNotFound,
              "unknown builtin taxonomy '" + std::string(name) + "'");
}

std::string_view surgery_kind_name(SurgeryKind kind) {
  switch (kind) {
    case SurgeryKind::kCholecystectomy: return "cholecystectomy";
    case SurgeryKind::kGastrectomy: return "gastrectomy";
    case SurgeryKind::kCustom: return "custom";
  }
  return "custom";
}

std::optional<SurgeryKind> parse_surgery_kind(std::string_view name) {
  if (name == "cholecystectomy") return SurgeryKind::kCholecystectomy;
  if (name == "gastrectomy") return SurgeryKind::kGastrectomy;
  if (name == "custom") return SurgeryKind::kCustom;
  return std::nullopt;
}

bool FrameTrack::has_blank() const {
  return std::any_of(labels.begin(), labels.end(),
                     [](const Label& l) { return !l.has_value(); });
}

std::string_view issue_code_name(IssueCode code) {
  switch (code) {
    case IssueCode::kUnknownLabel: return "unknown_label";
    case IssueCode::kUnexpectedBlank: return "unexpected_blank";
    case IssueCode::kLengthMismatch: return "length_mismatch";
  }
  return "unknown_label";
}

ValidationReport validate_track(const FrameTrack& track,
                                const PhaseTaxonomy& taxonomy,
                                std::optional<std::size_t> expected_frames) {
  const bool blank_allowed = track.provenance == TrackProvenance::kDraft ||
                             track.provenance == TrackProvenance::kDecision;
  ValidationReport report;
  for (std::size_t k = 0; k < track.labels.size(); ++k) {
    const Label& label = track.labels[k];
    if (!label) {
      if (!blank_allowed) {
        report.issues.push_back({k, IssueCode::kUnexpectedBlank,
                                 "BLANK is not allowed in this track"});
      }
    } else if (!taxonomy.contains(*label)) {
      report.issues.push_back(
          {k, IssueCode::kUnknownLabel,
           "label " + std::to_string(*label) + " is not in the taxonomy"});
    }
  }
  if (expected_frames && *expected_frames != track.labels.size()) {
    report.issues.push_back(
        {std::min(*expected_frames, track.labels.size()),
         IssueCode::kLengthMismatch,
         "expected " + std::to_string(*expected_frames) + " frames, got " +
             std::to_string(track.labels.size())});
  }
  report.ok = report.issues.empty();
  return report;
}

std::vector<Segment> runs(const std::vector<Label>& labels, std::size_t first,
                          std::size_t last) {
  std::vector<Segment> out;
  if (labels.empty() || first > last || last >= labels.size()) return out;
  std::size_t start = first;
  for (std::size_t k = first + 1; k <= last + 1; ++k) {
    if (k == last + 1 || labels[k] != labels[start]) {
      out.push_back({static_cast<std::int64_t>(start),
                     static_cast<std::int64_t>(k - 1), labels[start]});
      start = k;
    }
  }
  return out;
}

SegmentTrack to_segments(const FrameTrack& track) {
  if (track.labels.empty()) {
    throw Error(ErrorCode::kEmptyTrack, "track '" + track.case_id +
                                            "/" + track.annotator_id +
                                            "' has no frames");
  }
  return SegmentTrack{track.case_id, track.annotator_id, track.fps,
                      track.provenance,
                      runs(track.labels, 0, track.labels.size() - 1)};
}

FrameTrack to_frames(const SegmentTrack& segments) {
  FrameTrack out{segments.case_id, segments.annotator_id, segments.fps,
                 segments.provenance, {}};
  std::int64_t expected_start = 0;
  for (const auto& s : segments.segments) {
    if (s.start_frame != expected_start || s.end_frame < s.start_frame) {
      throw Error(ErrorCode::kMalformedSegments,
                  "segment [" + std::to_string(s.start_frame) + "," +
                      std::to_string(s.end_frame) + "] expected to start at " +
                      std::to_string(expected_start));
    }
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(s.length()),
                      s.label);
    expected_start = s.end_frame + 1;
  }
  return out;
}

bool segments_well_formed(const SegmentTrack& segments) {
  std::int64_t expected_start = 0;
  const Segment* prev = nullptr;
  for (const auto& s : segments.segments) {
    if (s.start_frame != expected_start || s.end_frame < s.start_frame) {
      return false;
    }
    if (prev != nullptr && prev->label == s.label) return false;
    expected_start = s.end_frame + 1;
    prev = &s;
  }
  return true;
}

std::vector<std::size_t> transitions(const FrameTrack& track) {
  if (track.has_blank()) {
    throw Error(ErrorCode::kBlankInTrack,
                "transitions require a blank-free track");
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k < track.labels.size(); ++k) {
    if (track.labels[k] != track.labels[k - 1]) out.push_back(k);
  }
  return out;
}

}  // namespace phaseforge
