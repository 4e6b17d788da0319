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

// Metric core: cross-entropy, per-phase average precision and mAP, confusion
// matrices, consensus delta tables, mAP consistency audits and per-model
// deviation reports.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "phaseforge/label_model.hpp"

namespace phaseforge {

inline constexpr double kNormalizationTolerance = 1e-6;
inline constexpr double kConfidenceFloor = 1e-12;

// Per-frame confidence vectors, row-major. Column j scores phase
// column_phase_ids[j].
class PredictionLog {
 public:
  PredictionLog() = default;
  // Throws kInvalidArgument on shape errors and kNumericError on non-finite
  // values. Column ids default to 0..num_phases-1.
  PredictionLog(std::string case_id, std::size_t num_phases,
                std::vector<double> values, std::int64_t frame_offset = 0,
                std::vector<PhaseId> column_phase_ids = {});

  const std::string& case_id() const { return case_id_; }
  std::size_t num_phases() const { return num_phases_; }
  std::size_t num_frames() const {
    return num_phases_ == 0 ? 0 : values_.size() / num_phases_;
  }
  std::int64_t frame_offset() const { return frame_offset_; }
  bool normalized() const { return normalized_; }
  const std::vector<PhaseId>& column_phase_ids() const { return column_ids_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * num_phases_, num_phases_};
  }
  std::optional<std::size_t> column_of(PhaseId id) const;

  // Copy whose columns are relabelled with the taxonomy's ids in order.
  // Throws kInvalidArgument when the column count differs.
  PredictionLog bound_to(const PhaseTaxonomy& taxonomy) const;

  friend bool operator==(const PredictionLog&, const PredictionLog&) = default;

 private:
  std::string case_id_;
  std::size_t num_phases_ = 0;
  std::int64_t frame_offset_ = 0;
  std::vector<PhaseId> column_ids_;
  std::vector<double> values_;
  bool normalized_ = false;
};

// Lowest-index column holding the row maximum.
std::size_t argmax_column(std::span<const double> row);

struct CrossEntropyResult {
  double loss = 0.0;
  std::size_t frames = 0;  // evaluated frame count
};

// Mean negative log confidence of the true phase over the frames covered by
// both inputs, with confidences clamped below at kConfidenceFloor.
// Throws kNotNormalized, kNoOverlap, kBlankInTrack, kUnknownPhase.
CrossEntropyResult cross_entropy(const PredictionLog& log,
                                 const FrameTrack& truth);

// Non-interpolated AP over frames ranked by descending confidence in
// `phase`, ties broken by ascending frame index. nullopt when the phase never
// occurs in the truth. Throws kUnknownPhase, kNoOverlap, kBlankInTrack.
std::optional<double> phase_ap(const PredictionLog& log,
                               const FrameTrack& truth, PhaseId phase);

struct EvalReport {
  std::vector<PhaseId> phase_ids;                // taxonomy order
  std::vector<std::optional<double>> per_phase_ap;  // nullopt = ABSENT
  double map_value = 0.0;                       // mean of defined APs
  std::vector<std::vector<std::uint64_t>> confusion;  // [truth][predicted]
  std::vector<std::uint64_t> support;
  std::size_t evaluated_frames = 0;
  std::vector<PhaseId> absent_phases;
};

EvalReport eval_report(const PredictionLog& log, const FrameTrack& truth,
                       const PhaseTaxonomy& taxonomy);

// Signed fixed-point decimal with nine fractional digits. Table arithmetic
// runs on these so that ap + delta reproduces the consensus value exactly.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Decimal() = default;
  static constexpr Decimal from_units(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }
  // Parses "[+-]digits[.digits]"; more than nine fractional digits round
  // half away from zero. Throws kNumericError.
  static Decimal parse(std::string_view text);
  static Decimal from_double(double value);

  constexpr std::int64_t units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / kScale; }
  // Half-up (away from zero) rounding to `places` decimals, rendered with an
  // explicit sign when `signed_display` is set.
  std::string display(int places, bool signed_display = false) const;
  std::string to_string() const;  // shortest exact form

  friend constexpr Decimal operator+(Decimal a, Decimal b) {
    return from_units(a.units_ + b.units_);
  }
  friend constexpr Decimal operator-(Decimal a, Decimal b) {
    return from_units(a.units_ - b.units_);
  }
  friend constexpr auto operator<=>(const Decimal&, const Decimal&) = default;

 private:
  std::int64_t units_ = 0;
};

inline constexpr std::string_view kConsensusAnnotation = "consensus";

struct ResultKey {
  std::string model;
  std::string split;
  std::string annotation;  // annotator id or kConsensusAnnotation

  friend auto operator<=>(const ResultKey&, const ResultKey&) = default;
};

using ResultSet = std::map<ResultKey, Decimal>;

struct DeltaRow {
  std::string model;
  std::string split;
  std::map<std::string, Decimal> ap_by_annotation;
  Decimal consensus_ap;
  std::map<std::string, Decimal> deltas;  // consensus_ap - ap
};

struct DeltaTable {
  std::vector<DeltaRow> rows;  // ordered by (model, split)
};

// Throws kMissingConsensus when a (model, split) has no consensus cell.
DeltaTable delta_table(const ResultSet& results);

// Mean delta per model over every (split, annotation) cell.
std::map<std::string, double> mean_delta_by_model(const DeltaTable& table);

struct ConsistencyResult {
  double derived_map = 0.0;
  bool consistent = false;
};

// Throws kInvalidArgument when split_aps is empty.
ConsistencyResult consistency_check(std::span<const double> split_aps,
                                    double reported_map, double tolerance);

struct DeviationEntry {
  double total_ap = 0.0;
  std::map<std::string, double> deviations;  // model -> model_ap - total_ap
};

struct DeviationReport {
  std::map<std::string, DeviationEntry> by_key;
};

using ApGrid = std::map<std::string, std::map<std::string, double>>;

// aps: model -> key -> AP. Throws kKeyMismatch when models disagree on keys.
DeviationReport deviation_report(const ApGrid& aps);

}  // namespace phaseforge
