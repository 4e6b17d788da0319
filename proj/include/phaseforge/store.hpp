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

// Versioned directory-tree persistence:
//
//   <root>/projects/<project>/project/v000001.json
//   <root>/projects/<project>/cases/<case>/manifest/v000001.json
//   <root>/projects/<project>/cases/<case>/tracks/<annotator>/v000001.csv
//   <root>/projects/<project>/cases/<case>/draft/v000001.csv
//   <root>/projects/<project>/cases/<case>/draft/v000001.sources.json
//   <root>/projects/<project>/cases/<case>/resolutions/draft-<n>/v000001.json
//   <root>/projects/<project>/cases/<case>/reports/<name>/v000001.json
//
// Every write lands in a fresh version file via write-temp-then-link, so a
// reader sees either the previous version or the complete new one. A version
// file is never overwritten. Writers to one project must be serialized by the
// caller.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phaseforge/consensus.hpp"
#include "phaseforge/formats.hpp"
#include "phaseforge/label_model.hpp"

namespace phaseforge {

// PHASEFORGE_HOME when set, else $HOME/.phaseforge, else ./.phaseforge.
std::filesystem::path default_store_root();

// Names used as path components: [A-Za-z0-9._-]+, not "." or "..".
bool valid_store_name(std::string_view name);

class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Atomically writes the next version under `dir` (relative to the root)
  // and returns its number, starting at 1.
  std::uint64_t write_version(const std::filesystem::path& dir,
                              std::string_view extension,
                              std::string_view bytes);
  std::vector<std::uint64_t> versions(const std::filesystem::path& dir,
                                      std::string_view extension) const;
  std::optional<std::string> read_version(const std::filesystem::path& dir,
                                          std::string_view extension,
                                          std::uint64_t version) const;
  std::optional<std::string> read_latest(const std::filesystem::path& dir,
                                         std::string_view extension) const;

  // Typed accessors. Throw kInvalidArgument on bad names.
  std::filesystem::path project_dir(std::string_view project) const;
  std::filesystem::path case_dir(std::string_view project,
                                 std::string_view case_id) const;

  bool project_exists(std::string_view project) const;
  std::vector<std::string> projects() const;
  std::vector<std::string> cases(std::string_view project) const;

  std::uint64_t put_project(std::string_view project,
                            const PhaseTaxonomy& taxonomy);
  std::optional<PhaseTaxonomy> project_taxonomy(std::string_view project) const;

  std::uint64_t put_manifest(std::string_view project,
                             const CaseManifest& manifest);
  std::optional<CaseManifest> manifest(std::string_view project,
                                       std::string_view case_id) const;

  std::uint64_t put_track(std::string_view project, const FrameTrack& track);
  std::optional<FrameTrack> track(std::string_view project,
                                  std::string_view case_id,
                                  std::string_view annotator) const;
  std::optional<FrameTrack> track(std::string_view project,
                                  std::string_view case_id,
                                  std::string_view annotator,
                                  std::uint64_t version) const;
  std::uint64_t track_version(std::string_view project,
                              std::string_view case_id,
                              std::string_view annotator) const;
  std::vector<std::string> annotators(std::string_view project,
                                      std::string_view case_id) const;

  // `sources` maps each merged annotator to the track version used.
  std::uint64_t put_draft(std::string_view project, const FrameTrack& merged,
                          const std::map<std::string, std::uint64_t>& sources);
  std::map<std::string, std::uint64_t> draft_sources(
      std::string_view project, std::string_view case_id,
      std::uint64_t draft_version) const;
  std::optional<FrameTrack> draft(std::string_view project,
                                  std::string_view case_id) const;
  std::uint64_t draft_version(std::string_view project,
                              std::string_view case_id) const;

  // Append-only resolution events against one draft version, returned in
  // write order.
  std::uint64_t append_resolution_event(std::string_view project,
                                        std::string_view case_id,
                                        std::uint64_t draft_version,
                                        std::string_view event_json);
  std::vector<std::string> resolution_events(std::string_view project,
                                             std::string_view case_id,
                                             std::uint64_t draft_version) const;

  std::uint64_t put_report(std::string_view project, std::string_view case_id,
                           std::string_view name, std::string_view json);

 private:
  std::filesystem::path root_;
};

}  // namespace phaseforge
