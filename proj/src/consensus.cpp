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

#include "phaseforge/consensus.hpp"

#include <algorithm>
#include <limits>

#include "phaseforge/error.hpp"

namespace phaseforge {
namespace {

void check_merge_inputs(std::span<const FrameTrack> tracks) {
  if (tracks.size() < 2) {
    throw Error(ErrorCode::kNotEnoughAnnotators,
                "at least two annotator tracks are required, got " +
                    std::to_string(tracks.size()));
  }
  const auto& first = tracks.front();
  for (const auto& t : tracks) {
    if (t.case_id != first.case_id) {
      throw Error(ErrorCode::kCaseMismatch, "tracks belong to cases '" +
                                                first.case_id + "' and '" +
                                                t.case_id + "'");
    }
    if (t.size() != first.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "track '" + t.annotator_id + "' has " +
                      std::to_string(t.size()) + " frames, expected " +
                      std::to_string(first.size()));
    }
    if (t.has_blank()) {
      throw Error(ErrorCode::kBlankInTrack,
                  "annotator track '" + t.annotator_id + "' contains BLANK");
    }
  }
  if (first.labels.empty()) {
    throw Error(ErrorCode::kEmptyTrack, "tracks have no frames");
  }
}

}  // namespace

ConsensusDraft and_merge(std::span<const FrameTrack> tracks) {
  check_merge_inputs(tracks);

  // Canonical source order makes the draft independent of input order.
  std::vector<FrameTrack> sources(tracks.begin(), tracks.end());
  std::stable_sort(sources.begin(), sources.end(),
                   [](const FrameTrack& a, const FrameTrack& b) {
                     if (a.annotator_id != b.annotator_id) {
                       return a.annotator_id < b.annotator_id;
                     }
                     return a.labels < b.labels;
                   });

  const std::size_t n = sources.front().size();
  ConsensusDraft draft;
  draft.case_id = sources.front().case_id;
  draft.merged.case_id = draft.case_id;
  draft.merged.annotator_id = "consensus";
  draft.merged.fps = sources.front().fps;
  draft.merged.provenance = TrackProvenance::kDraft;
  draft.merged.labels.resize(n);
  draft.frame_provenance.resize(n);

  for (std::size_t k = 0; k < n; ++k) {
    const Label& candidate = sources.front().labels[k];
    bool unanimous = true;
    for (std::size_t t = 1; t < sources.size() && unanimous; ++t) {
      unanimous = sources[t].labels[k] == candidate;
    }
    draft.merged.labels[k] = unanimous ? candidate : kBlank;
    draft.frame_provenance[k] =
        unanimous ? FrameOrigin::kAgreed : FrameOrigin::kBlank;
  }
  for (const auto& s : sources) draft.source_annotators.push_back(s.annotator_id);
  draft.sources = std::move(sources);
  return draft;
}

ConsensusDraft draft_from_merged(FrameTrack merged) {
  ConsensusDraft draft;
  draft.case_id = merged.case_id;
  merged.provenance = TrackProvenance::kDraft;
  draft.frame_provenance.reserve(merged.size());
  for (const auto& l : merged.labels) {
    draft.frame_provenance.push_back(l ? FrameOrigin::kAgreed
                                       : FrameOrigin::kBlank);
  }
  draft.merged = std::move(merged);
  return draft;
}

std::vector<BlankSegment> blank_segments(const ConsensusDraft& draft) {
  std::vector<BlankSegment> out;
  const auto& labels = draft.merged.labels;
  if (labels.empty()) return out;
  for (const Segment& run : runs(labels, 0, labels.size() - 1)) {
    if (run.label) continue;
    BlankSegment seg{run.start_frame, run.end_frame, {}};
    for (const auto& src : draft.sources) {
      seg.evidence.push_back(
          {src.annotator_id,
           runs(src.labels, static_cast<std::size_t>(run.start_frame),
                static_cast<std::size_t>(run.end_frame))});
    }
    out.push_back(std::move(seg));
  }
  return out;
}

void validate_ledger(const ResolutionLedger& ledger,
                     const PhaseTaxonomy* taxonomy) {
  std::vector<const Resolution*> sorted;
  for (const auto& e : ledger.entries) {
    if (e.end_frame < e.start_frame || e.start_frame < 0) {
      throw Error(ErrorCode::kMalformedLedger,
                  "ledger entry [" + std::to_string(e.start_frame) + "," +
                      std::to_string(e.end_frame) + "] is not a valid range");
    }
    if (taxonomy != nullptr && !taxonomy->contains(e.assigned_label)) {
      throw Error(ErrorCode::kUnknownPhase,
                  "ledger label " + std::to_string(e.assigned_label) +
                      " is not in the taxonomy");
    }
    sorted.push_back(&e);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Resolution* a, const Resolution* b) {
              return a->start_frame < b->start_frame;
            });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start_frame <= sorted[i - 1]->end_frame) {
      throw Error(ErrorCode::kMalformedLedger,
                  "ledger entries overlap at frame " +
                      std::to_string(sorted[i]->start_frame));
    }
  }
}

ResolvedTrack apply_resolutions(const ConsensusDraft& draft,
                                const ResolutionLedger& ledger) {
  validate_ledger(ledger);
  const auto n = static_cast<std::int64_t>(draft.merged.size());
  ResolvedTrack out;
  out.track = draft.merged;
  for (const auto& e : ledger.entries) {
    if (e.end_frame >= n) {
      throw Error(ErrorCode::kResolutionOverreach,
                  "ledger entry ends at frame " + std::to_string(e.end_frame) +
                      " beyond the track (" + std::to_string(n) + " frames)");
    }
    for (std::int64_t k = e.start_frame; k <= e.end_frame; ++k) {
      if (draft.frame_provenance[static_cast<std::size_t>(k)] ==
          FrameOrigin::kAgreed) {
        throw Error(ErrorCode::kResolutionOverreach,
                    "ledger entry touches agreed frame " + std::to_string(k));
      }
      out.track.labels[static_cast<std::size_t>(k)] = e.assigned_label;
    }
  }
  for (const Segment& run : runs(out.track.labels, 0,
                                 out.track.labels.empty()
                                     ? 0
                                     : out.track.labels.size() - 1)) {
    if (!run.label) out.residual_blanks.push_back(run);
  }
  out.complete = out.residual_blanks.empty();
  out.track.provenance =
      out.complete ? TrackProvenance::kResolved : TrackProvenance::kDraft;
  return out;
}

AgreementStats pairwise_agreement(std::span<const FrameTrack> tracks) {
  check_merge_inputs(tracks);
  const std::size_t m = tracks.size();
  const std::size_t n = tracks.front().size();
  AgreementStats stats;
  stats.pairwise.assign(m, std::vector<double>(m, 1.0));
  for (const auto& t : tracks) stats.annotators.push_back(t.annotator_id);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      std::size_t equal = 0;
      for (std::size_t k = 0; k < n; ++k) {
        equal += tracks[i].labels[k] == tracks[j].labels[k];
      }
      const double ratio = static_cast<double>(equal) / static_cast<double>(n);
      stats.pairwise[i][j] = ratio;
      stats.pairwise[j][i] = ratio;
    }
  }
  const ConsensusDraft draft = and_merge(tracks);
  const auto agreed = std::count(draft.frame_provenance.begin(),
                                 draft.frame_provenance.end(),
                                 FrameOrigin::kAgreed);
  stats.unanimity_coverage =
      static_cast<double>(agreed) / static_cast<double>(n);
  return stats;
}

BoundaryProfile boundary_disagreement_profile(
    const FrameTrack& reference, std::span<const FrameTrack> others,
    std::int64_t max_distance) {
  if (max_distance < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_distance must be >= 0");
  }
  for (const auto& o : others) {
    if (o.size() != reference.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "track '" + o.annotator_id + "' length differs from reference");
    }
  }
  const std::vector<std::size_t> bounds = transitions(reference);
  const auto n = static_cast<std::int64_t>(reference.size());

  // Two sweeps give the distance to the nearest boundary on each side.
  constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n), kFar);
  std::int64_t last = -kFar;
  std::size_t bi = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (bi < bounds.size() && static_cast<std::int64_t>(bounds[bi]) == k) {
      last = k;
      ++bi;
    }
    dist[static_cast<std::size_t>(k)] = k - last;
  }
  std::int64_t next = 2 * kFar;
  bi = bounds.size();
  for (std::int64_t k = n - 1; k >= 0; --k) {
    if (bi > 0 && static_cast<std::int64_t>(bounds[bi - 1]) == k) {
      next = k;
      --bi;
    }
    dist[static_cast<std::size_t>(k)] =
        std::min(dist[static_cast<std::size_t>(k)], next - k);
  }

  BoundaryProfile profile;
  profile.max_distance = max_distance;
  profile.bins.resize(static_cast<std::size_t>(max_distance) + 1);
  for (std::int64_t k = 0; k < n; ++k) {
    const auto d = static_cast<std::size_t>(
        std::min(dist[static_cast<std::size_t>(k)], max_distance));
    auto& bin = profile.bins[d];
    ++bin.frames_at_distance;
    const Label& ref = reference.labels[static_cast<std::size_t>(k)];
    for (const auto& o : others) {
      if (o.labels[static_cast<std::size_t>(k)] != ref) {
        ++bin.disagreeing_frames;
        break;
      }
    }
  }
  return profile;
}

}  // namespace phaseforge
