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

// Inspector workflow over HTTP-shaped requests. The transport lives in
// http_server.hpp; everything here is callable directly.
//
// Writes to one case are serialized by a per-case mutex and persisted before
// the response is produced. Reads work on immutable snapshots.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phaseforge/consensus.hpp"
#include "phaseforge/store.hpp"

namespace phaseforge {

struct ServiceRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string authorization;  // raw Authorization header
};

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ResolutionSubmission {
  std::string submission_id;  // empty: derived from the payload
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  PhaseId label = 0;
  std::string inspector_id;
  std::string note;
  std::optional<UtcTime> timestamp;  // defaults to now
};

// Error carrying the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class InspectorService {
 public:
  // Returns true when the bearer token is acceptable.
  using Authorizer = std::function<bool(std::string_view token)>;

  explicit InspectorService(ProjectStore& store);

  // No authorizer means every request is accepted.
  void set_authorizer(Authorizer authorizer) { authorizer_ = std::move(authorizer); }

  ServiceResponse handle(const ServiceRequest& request);

  // Appends the resolution, shrinks the pending queue and returns it.
  // Throws ServiceError 404/409/422.
  std::vector<BlankSegment> handle_resolution(std::string_view project,
                                              std::string_view case_id,
                                              const ResolutionSubmission& sub);
  // Pending blank segments with evidence, ascending.
  std::vector<BlankSegment> pending_blanks(std::string_view project,
                                           std::string_view case_id);
  // Final blank-free track CSV. Throws ServiceError 409 while blanks remain.
  std::string export_consensus(std::string_view project,
                               std::string_view case_id);
  ResolutionLedger ledger(std::string_view project, std::string_view case_id);
  ConsensusDraft draft(std::string_view project, std::string_view case_id);

  static nlohmann::json openapi();

 private:
  struct CaseState {
    std::uint64_t draft_version = 0;
    ConsensusDraft draft;
    ResolutionLedger ledger;
    std::map<std::string, std::string> submissions;  // id -> payload digest
    std::vector<Segment> pending;
  };
  using Snapshot = std::shared_ptr<const CaseState>;

  std::mutex& case_mutex(const std::string& key);
  Snapshot snapshot(std::string_view project, std::string_view case_id);
  Snapshot load_case(std::string_view project, std::string_view case_id);
  void publish(const std::string& key, Snapshot state);
  PhaseTaxonomy require_project(std::string_view project);
  CaseManifest require_case(std::string_view project, std::string_view case_id);

  ServiceResponse route(const ServiceRequest& request);
  ServiceResponse create_project(const ServiceRequest& request);
  ServiceResponse create_case(std::string_view project,
                              const ServiceRequest& request);
  ServiceResponse put_track(std::string_view project, std::string_view case_id,
                            std::string_view annotator,
                            const ServiceRequest& request);
  ServiceResponse run_consensus(std::string_view project,
                                std::string_view case_id,
                                const ServiceRequest& request);
  ServiceResponse post_resolution(std::string_view project,
                                  std::string_view case_id,
                                  const ServiceRequest& request);
  ServiceResponse stats(std::string_view project, std::string_view case_id,
                        const ServiceRequest& request);
  ServiceResponse evaluate(std::string_view project,
                           const ServiceRequest& request);

  ProjectStore& store_;
  Authorizer authorizer_;
  std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> case_mutexes_;
  std::mutex snapshot_mutex_;
  std::map<std::string, Snapshot> snapshots_;
};

}  // namespace phaseforge
