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

// Interchange formats. All CSV writers emit the canonical form (LF line
// endings, every line terminated); parsers also accept CRLF and a missing
// final newline.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phaseforge/consensus.hpp"
#include "phaseforge/evaluation.hpp"
#include "phaseforge/label_model.hpp"
#include "phaseforge/splits.hpp"
#include "phaseforge/stream_replay.hpp"

namespace phaseforge {

// Track CSV: header `frame,phase`, dense frames 0..N-1, phase an integer or
// BLANK. Provenance is kDraft when a BLANK occurs, otherwise kAnnotator.
FrameTrack parse_track_csv(std::string_view bytes, std::string case_id = "",
                           std::string annotator_id = "");
std::string write_track_csv(const FrameTrack& track);

// Prediction CSV: header `frame,c0,...,c{C-1}`, dense ascending frames that
// may start above 0. num_phases == 0 infers C from the header.
PredictionLog parse_prediction_csv(std::string_view bytes,
                                   std::size_t num_phases = 0,
                                   std::string case_id = "");
std::string write_prediction_csv(const PredictionLog& log);

// Metadata CSV: `case_id,age,operation_minutes,bleeding_ml,bmi,
// recording_system` followed by optional extra numeric columns. Empty cells
// are missing values.
std::vector<CaseMetadata> parse_metadata_csv(std::string_view bytes);
std::string write_metadata_csv(const std::vector<CaseMetadata>& cases);

// Decision CSV: `frame,phase,state` with state `warmup` or `decided`.
std::string write_decision_csv(const DecisionTrack& decisions);
DecisionTrack parse_decision_csv(std::string_view bytes);

// Results CSV for delta tables: `model,split,annotation,ap`.
ResultSet parse_results_csv(std::string_view bytes);
std::string write_results_csv(const ResultSet& results);

struct CaseManifest {
  std::string case_id;
  FrameRate fps;
  std::size_t frame_count = 1;
  RecordingSystem recording_system = RecordingSystem::kOther;
  CaseMetadata metadata;
  std::map<std::string, std::string> track_files;       // annotator -> path
  std::map<std::string, std::string> prediction_files;  // model -> path

  friend bool operator==(const CaseManifest&, const CaseManifest&) = default;
};

CaseManifest parse_manifest_json(std::string_view bytes);
std::string write_manifest_json(const CaseManifest& manifest);
// Parses and checks that every referenced file exists, resolving relative
// paths against the manifest's directory. Throws kNotFound.
CaseManifest load_manifest(const std::filesystem::path& path);

ResolutionLedger parse_ledger_json(std::string_view bytes);
std::string write_ledger_json(const ResolutionLedger& ledger);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_utc(UtcTime t);
UtcTime parse_utc(std::string_view text);

// {"surgery_kind": ..., "phases": [{"id", "name", "kind"}]}
PhaseTaxonomy parse_taxonomy_json(std::string_view bytes);
// A builtin name ("cholec", "gastrectomy") or a path to a taxonomy JSON.
PhaseTaxonomy resolve_taxonomy(std::string_view name_or_path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// JSON views of result types.
nlohmann::json to_json(const PhaseTaxonomy& taxonomy);
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const std::vector<BlankSegment>& segments);
nlohmann::json to_json(const AgreementStats& stats);
nlohmann::json to_json(const BoundaryProfile& profile);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const DeltaTable& table);
nlohmann::json to_json(const DeviationReport& report);
nlohmann::json to_json(const SplitPlan& plan);
nlohmann::json to_json(const DivergenceReport& report);
nlohmann::json to_json(const ResolutionLedger& ledger);
nlohmann::json to_json(const CaseManifest& manifest);

}  // namespace phaseforge
