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

#include "phaseforge/service.hpp"

#include <algorithm>
#include <sstream>

#include "phaseforge/error.hpp"
#include "phaseforge/evaluation.hpp"
#include "phaseforge/formats.hpp"

namespace phaseforge {
namespace {

using nlohmann::json;

ServiceResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

ServiceResponse error_response(int status, const std::string& message,
                               json extra = json::object()) {
  extra["error"] = message;
  return json_response(status, extra);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kSchemaError:
    case ErrorCode::kDenseIndexViolation:
    case ErrorCode::kNumericError:
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kConflict:
    case ErrorCode::kResolutionOverreach: return 409;
    case ErrorCode::kIoError: return 500;
    default: return 422;
  }
}

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

json parse_body(const std::string& body) {
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ServiceError(400, std::string("invalid JSON body: ") + e.what());
  }
}

std::string case_key(std::string_view project, std::string_view case_id) {
  return std::string(project) + "/" + std::string(case_id);
}

std::string submission_digest(const ResolutionSubmission& s) {
  std::ostringstream out;
  out << s.start_frame << '|' << s.end_frame << '|' << s.label << '|'
      << s.inspector_id << '|' << s.note;
  return out.str();
}

json event_json(const std::string& id, const Resolution& r) {
  return {{"submission_id", id},
          {"start_frame", r.start_frame},
          {"end_frame", r.end_frame},
          {"assigned_label", r.assigned_label},
          {"inspector_id", r.inspector_id},
          {"timestamp", format_utc(r.timestamp)},
          {"note", r.note}};
}

std::vector<BlankSegment> with_evidence(const ConsensusDraft& draft,
                                        const std::vector<Segment>& pending) {
  std::vector<BlankSegment> out;
  for (const auto& p : pending) {
    BlankSegment seg{p.start_frame, p.end_frame, {}};
    for (const auto& src : draft.sources) {
      seg.evidence.push_back(
          {src.annotator_id, runs(src.labels, static_cast<std::size_t>(p.start_frame),
                                  static_cast<std::size_t>(p.end_frame))});
    }
    out.push_back(std::move(seg));
  }
  return out;
}

json ranges_json(const std::vector<Segment>& segments) {
  json out = json::array();
  for (const auto& s : segments) {
    out.push_back({{"start_frame", s.start_frame}, {"end_frame", s.end_frame}});
  }
  return out;
}

}  // namespace

InspectorService::InspectorService(ProjectStore& store) : store_(store) {}

std::mutex& InspectorService::case_mutex(const std::string& key) {
  std::lock_guard lock(registry_mutex_);
  auto& slot = case_mutexes_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void InspectorService::publish(const std::string& key, Snapshot state) {
  std::lock_guard lock(snapshot_mutex_);
  snapshots_[key] = std::move(state);
}

PhaseTaxonomy InspectorService::require_project(std::string_view project) {
  if (!valid_store_name(project)) throw ServiceError(400, "invalid project id");
  auto taxonomy = store_.project_taxonomy(project);
  if (!taxonomy) {
    throw ServiceError(404, "unknown project '" + std::string(project) + "'");
  }
  return *taxonomy;
}

CaseManifest InspectorService::require_case(std::string_view project,
                                            std::string_view case_id) {
  require_project(project);
  if (!valid_store_name(case_id)) throw ServiceError(400, "invalid case id");
  auto manifest = store_.manifest(project, case_id);
  if (!manifest) {
    throw ServiceError(404, "unknown case '" + std::string(case_id) + "'");
  }
  return *manifest;
}

InspectorService::Snapshot InspectorService::load_case(
    std::string_view project, std::string_view case_id) {
  require_case(project, case_id);
  auto state = std::make_shared<CaseState>();
  state->draft_version = store_.draft_version(project, case_id);
  if (state->draft_version == 0) return state;

  FrameTrack merged = *store_.draft(project, case_id);
  std::vector<FrameTrack> sources;
  for (const auto& [annotator, version] :
       store_.draft_sources(project, case_id, state->draft_version)) {
    if (auto t = store_.track(project, case_id, annotator, version)) {
      sources.push_back(std::move(*t));
    }
  }
  std::optional<ConsensusDraft> rebuilt;
  if (sources.size() >= 2) {
    rebuilt = and_merge(sources);
    if (rebuilt->merged.labels != merged.labels) rebuilt.reset();
  }
  state->draft = rebuilt ? std::move(*rebuilt) : draft_from_merged(std::move(merged));

  // Replay the event log.
  for (const auto& bytes :
       store_.resolution_events(project, case_id, state->draft_version)) {
    const json e = json::parse(bytes);
    Resolution r;
    r.start_frame = e.at("start_frame").get<std::int64_t>();
    r.end_frame = e.at("end_frame").get<std::int64_t>();
    r.assigned_label = e.at("assigned_label").get<PhaseId>();
    r.inspector_id = e.at("inspector_id").get<std::string>();
    r.timestamp = parse_utc(e.at("timestamp").get<std::string>());
    r.note = e.value("note", "");
    ResolutionSubmission sub{e.at("submission_id").get<std::string>(),
                             r.start_frame, r.end_frame, r.assigned_label,
                             r.inspector_id, r.note, r.timestamp};
    state->submissions[sub.submission_id] = submission_digest(sub);
    state->ledger.entries.push_back(std::move(r));
  }
  state->pending = apply_resolutions(state->draft, state->ledger).residual_blanks;
  return state;
}

InspectorService::Snapshot InspectorService::snapshot(std::string_view project,
                                                      std::string_view case_id) {
  const std::string key = case_key(project, case_id);
  {
    std::lock_guard lock(snapshot_mutex_);
    if (auto it = snapshots_.find(key); it != snapshots_.end()) return it->second;
  }
  std::lock_guard case_lock(case_mutex(key));
  {
    std::lock_guard lock(snapshot_mutex_);
    if (auto it = snapshots_.find(key); it != snapshots_.end()) return it->second;
  }
  Snapshot state = load_case(project, case_id);
  publish(key, state);
  return state;
}

std::vector<BlankSegment> InspectorService::handle_resolution(
    std::string_view project, std::string_view case_id,
    const ResolutionSubmission& sub) {
  const PhaseTaxonomy taxonomy = require_project(project);
  const std::string key = case_key(project, case_id);
  Snapshot current = snapshot(project, case_id);
  std::lock_guard case_lock(case_mutex(key));
  {
    std::lock_guard lock(snapshot_mutex_);
    current = snapshots_.at(key);
  }
  if (current->draft_version == 0) {
    throw ServiceError(409, "no consensus draft for case '" + std::string(case_id) + "'");
  }

  const std::string digest = submission_digest(sub);
  const std::string id =
      sub.submission_id.empty() ? "auto-" + digest : sub.submission_id;
  if (auto it = current->submissions.find(id); it != current->submissions.end()) {
    if (it->second != digest) {
      throw ServiceError(409, "submission id '" + id + "' was used for a different resolution");
    }
    return with_evidence(current->draft, current->pending);
  }
  if (!taxonomy.contains(sub.label)) {
    throw ServiceError(422, "label " + std::to_string(sub.label) + " is not in the taxonomy");
  }
  const bool inside_pending = std::any_of(
      current->pending.begin(), current->pending.end(), [&](const Segment& p) {
        return p.start_frame <= sub.start_frame && sub.end_frame <= p.end_frame;
      });
  if (sub.end_frame < sub.start_frame || !inside_pending) {
    throw ServiceError(409, "range [" + std::to_string(sub.start_frame) + "," +
                                std::to_string(sub.end_frame) +
                                "] is not inside a pending blank segment");
  }

  Resolution r{sub.start_frame, sub.end_frame, sub.label, sub.inspector_id,
               sub.timestamp.value_or(std::chrono::floor<std::chrono::seconds>(
                   std::chrono::system_clock::now())),
               sub.note};
  // Durable before acknowledged.
  store_.append_resolution_event(project, case_id, current->draft_version,
                                 event_json(id, r).dump());

  auto next = std::make_shared<CaseState>(*current);
  next->ledger.entries.push_back(r);
  next->submissions[id] = digest;
  next->pending = apply_resolutions(next->draft, next->ledger).residual_blanks;
  publish(key, next);
  return with_evidence(next->draft, next->pending);
}

std::vector<BlankSegment> InspectorService::pending_blanks(
    std::string_view project, std::string_view case_id) {
  Snapshot s = snapshot(project, case_id);
  if (s->draft_version == 0) {
    throw ServiceError(409, "no consensus draft for case '" + std::string(case_id) + "'");
  }
  return with_evidence(s->draft, s->pending);
}

std::string InspectorService::export_consensus(std::string_view project,
                                               std::string_view case_id) {
  Snapshot s = snapshot(project, case_id);
  if (s->draft_version == 0) {
    throw ServiceError(409, "no consensus draft for case '" + std::string(case_id) + "'");
  }
  if (!s->pending.empty()) {
    throw ServiceError(409, std::to_string(s->pending.size()) +
                                " blank segment(s) are still pending");
  }
  return write_track_csv(apply_resolutions(s->draft, s->ledger).track);
}

ResolutionLedger InspectorService::ledger(std::string_view project,
                                          std::string_view case_id) {
  return snapshot(project, case_id)->ledger;
}

ConsensusDraft InspectorService::draft(std::string_view project,
                                       std::string_view case_id) {
  return snapshot(project, case_id)->draft;
}

ServiceResponse InspectorService::handle(const ServiceRequest& request) {
  if (authorizer_) {
    constexpr std::string_view kPrefix = "Bearer ";
    std::string_view auth = request.authorization;
    const bool has_bearer = auth.substr(0, kPrefix.size()) == kPrefix;
    if (!has_bearer || !authorizer_(auth.substr(kPrefix.size()))) {
      return error_response(401, "missing or invalid bearer token");
    }
  }
  try {
    return route(request);
  } catch (const ServiceError& e) {
    return error_response(e.status(), e.what());
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.what(),
                          {{"code", error_code_name(e.code())}});
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ServiceResponse InspectorService::route(const ServiceRequest& request) {
  const auto seg = path_segments(request.path);
  const std::string& method = request.method;
  auto method_not_allowed = [] { return error_response(405, "method not allowed"); };

  if (seg.size() < 2 || seg[0] != "api") return error_response(404, "not found");
  if (seg.size() == 2 && seg[1] == "spec") {
    if (method != "GET") return method_not_allowed();
    return json_response(200, openapi());
  }
  if (seg[1] != "projects") return error_response(404, "not found");
  if (seg.size() == 2) {
    if (method == "POST") return create_project(request);
    if (method == "GET") return json_response(200, store_.projects());
    return method_not_allowed();
  }
  const std::string& project = seg[2];
  if (seg.size() == 4 && seg[3] == "evaluate") {
    if (method != "POST") return method_not_allowed();
    return evaluate(project, request);
  }
  if (seg.size() < 4 || seg[3] != "cases") return error_response(404, "not found");
  if (seg.size() == 4) {
    if (method == "POST") return create_case(project, request);
    if (method == "GET") {
      require_project(project);
      return json_response(200, store_.cases(project));
    }
    return method_not_allowed();
  }
  const std::string& case_id = seg[4];
  if (seg.size() == 7 && seg[5] == "tracks") {
    if (method != "PUT") return method_not_allowed();
    return put_track(project, case_id, seg[6], request);
  }
  if (seg.size() != 6) return error_response(404, "not found");
  const std::string& action = seg[5];
  if (action == "consensus") {
    if (method != "POST") return method_not_allowed();
    return run_consensus(project, case_id, request);
  }
  if (action == "blanks") {
    if (method != "GET") return method_not_allowed();
    return json_response(200, to_json(pending_blanks(project, case_id)));
  }
  if (action == "resolutions") {
    if (method == "POST") return post_resolution(project, case_id, request);
    if (method == "GET") return json_response(200, to_json(ledger(project, case_id)));
    return method_not_allowed();
  }
  if (action == "stats") {
    if (method != "GET") return method_not_allowed();
    return stats(project, case_id, request);
  }
  if (action == "export") {
    if (method != "GET") return method_not_allowed();
    Snapshot s = snapshot(project, case_id);
    if (s->draft_version != 0 && !s->pending.empty()) {
      return error_response(409, "blank segments are still pending",
                            {{"remaining_blanks", ranges_json(s->pending)}});
    }
    return {200, "text/csv", export_consensus(project, case_id)};
  }
  return error_response(404, "not found");
}

ServiceResponse InspectorService::create_project(const ServiceRequest& request) {
  const json body = parse_body(request.body);
  const auto project = body.at("project_id").get<std::string>();
  if (!valid_store_name(project)) throw ServiceError(400, "invalid project id");
  const json& tax = body.contains("taxonomy") ? body.at("taxonomy") : json("cholec");
  const PhaseTaxonomy taxonomy = tax.is_string()
                                     ? builtin_taxonomy(tax.get<std::string>())
                                     : parse_taxonomy_json(tax.dump());
  std::lock_guard lock(case_mutex(project + "/"));
  if (auto existing = store_.project_taxonomy(project)) {
    if (*existing == taxonomy) {
      return json_response(200, {{"project_id", project}, {"created", false}});
    }
    throw ServiceError(409, "project '" + project + "' exists with another taxonomy");
  }
  store_.put_project(project, taxonomy);
  return json_response(201, {{"project_id", project}, {"created", true}});
}

ServiceResponse InspectorService::create_case(std::string_view project,
                                              const ServiceRequest& request) {
  require_project(project);
  const CaseManifest manifest = parse_manifest_json(request.body);
  if (!valid_store_name(manifest.case_id)) throw ServiceError(400, "invalid case id");
  std::lock_guard lock(case_mutex(case_key(project, manifest.case_id)));
  if (auto existing = store_.manifest(project, manifest.case_id)) {
    if (*existing == manifest) {
      return json_response(200, {{"case_id", manifest.case_id}, {"created", false}});
    }
  }
  const bool created = !store_.manifest(project, manifest.case_id).has_value();
  const auto version = store_.put_manifest(project, manifest);
  {
    std::lock_guard snap(snapshot_mutex_);
    snapshots_.erase(case_key(project, manifest.case_id));
  }
  return json_response(created ? 201 : 200, {{"case_id", manifest.case_id},
                                             {"created", created},
                                             {"version", version}});
}

ServiceResponse InspectorService::put_track(std::string_view project,
                                            std::string_view case_id,
                                            std::string_view annotator,
                                            const ServiceRequest& request) {
  const PhaseTaxonomy taxonomy = require_project(project);
  const CaseManifest manifest = require_case(project, case_id);
  if (!valid_store_name(annotator) || annotator == "consensus") {
    throw ServiceError(400, "invalid annotator id");
  }
  FrameTrack track = parse_track_csv(request.body, std::string(case_id),
                                     std::string(annotator));
  track.provenance = TrackProvenance::kAnnotator;
  track.fps = manifest.fps;
  const ValidationReport report = validate_track(track, taxonomy, manifest.frame_count);
  if (!report.ok) {
    return json_response(422, {{"error", "track failed validation"},
                               {"report", to_json(report)}});
  }
  std::lock_guard lock(case_mutex(case_key(project, case_id)));
  if (auto latest = store_.track(project, case_id, annotator);
      latest && latest->labels == track.labels) {
    return json_response(200, {{"annotator_id", annotator},
                               {"version", store_.track_version(project, case_id, annotator)},
                               {"created", false}});
  }
  const auto version = store_.put_track(project, track);
  return json_response(201, {{"annotator_id", annotator},
                             {"version", version},
                             {"created", true}});
}

ServiceResponse InspectorService::run_consensus(std::string_view project,
                                                std::string_view case_id,
                                                const ServiceRequest& request) {
  require_case(project, case_id);
  const std::string key = case_key(project, case_id);
  const bool force = request.query.count("force") && request.query.at("force") == "true";
  Snapshot current = snapshot(project, case_id);
  std::lock_guard lock(case_mutex(key));
  {
    std::lock_guard snap(snapshot_mutex_);
    current = snapshots_.at(key);
  }
  std::vector<FrameTrack> tracks;
  std::map<std::string, std::uint64_t> sources;
  for (const auto& annotator : store_.annotators(project, case_id)) {
    tracks.push_back(*store_.track(project, case_id, annotator));
    sources[annotator] = store_.track_version(project, case_id, annotator);
  }
  ConsensusDraft draft = and_merge(tracks);
  auto summary = [&](const CaseState& s, bool created) {
    return json{{"draft_version", s.draft_version},
                {"frames", s.draft.merged.size()},
                {"annotators", s.draft.source_annotators},
                {"blank_segments", s.pending.size()},
                {"unanimity_coverage", pairwise_agreement(tracks).unanimity_coverage},
                {"created", created}};
  };
  if (current->draft_version != 0 &&
      store_.draft_sources(project, case_id, current->draft_version) == sources) {
    return json_response(200, summary(*current, false));
  }
  if (current->draft_version != 0 && !current->ledger.entries.empty() && !force) {
    throw ServiceError(409, "resolutions exist for the current draft; pass force=true to re-merge");
  }
  auto next = std::make_shared<CaseState>();
  next->draft_version = store_.put_draft(project, draft.merged, sources);
  next->draft = std::move(draft);
  next->pending = apply_resolutions(next->draft, next->ledger).residual_blanks;
  publish(key, next);
  return json_response(201, summary(*next, true));
}

ServiceResponse InspectorService::post_resolution(std::string_view project,
                                                  std::string_view case_id,
                                                  const ServiceRequest& request) {
  const json body = parse_body(request.body);
  ResolutionSubmission sub;
  sub.submission_id = body.value("submission_id", "");
  sub.start_frame = body.at("start_frame").get<std::int64_t>();
  sub.end_frame = body.at("end_frame").get<std::int64_t>();
  sub.label = body.at("label").get<PhaseId>();
  sub.inspector_id = body.at("inspector_id").get<std::string>();
  sub.note = body.value("note", "");
  if (body.contains("timestamp")) {
    sub.timestamp = parse_utc(body.at("timestamp").get<std::string>());
  }
  return json_response(200, {{"pending", to_json(handle_resolution(project, case_id, sub))}});
}

ServiceResponse InspectorService::stats(std::string_view project,
                                        std::string_view case_id,
                                        const ServiceRequest& request) {
  require_case(project, case_id);
  std::vector<FrameTrack> tracks;
  for (const auto& annotator : store_.annotators(project, case_id)) {
    tracks.push_back(*store_.track(project, case_id, annotator));
  }
  if (tracks.size() < 2) {
    throw ServiceError(409, "agreement statistics need at least two tracks");
  }
  std::size_t ref = 0;
  if (auto it = request.query.find("reference"); it != request.query.end()) {
    auto found = std::find_if(tracks.begin(), tracks.end(), [&](const FrameTrack& t) {
      return t.annotator_id == it->second;
    });
    if (found == tracks.end()) throw ServiceError(404, "unknown reference annotator");
    ref = static_cast<std::size_t>(found - tracks.begin());
  }
  std::int64_t cap = kDefaultBoundaryCap;
  if (auto it = request.query.find("max_distance"); it != request.query.end()) {
    cap = static_cast<std::int64_t>(parse_double(it->second));
  }
  std::vector<FrameTrack> others;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (i != ref) others.push_back(tracks[i]);
  }
  return json_response(
      200, {{"agreement", to_json(pairwise_agreement(tracks))},
            {"boundary", to_json(boundary_disagreement_profile(tracks[ref], others, cap))},
            {"reference", tracks[ref].annotator_id}});
}

ServiceResponse InspectorService::evaluate(std::string_view project,
                                           const ServiceRequest& request) {
  const PhaseTaxonomy taxonomy = require_project(project);
  const json body = parse_body(request.body);
  const auto case_id = body.at("case_id").get<std::string>();
  require_case(project, case_id);
  const std::string reference = body.value("reference", "consensus");
  const std::string model = body.value("model", "model");
  const PredictionLog log = parse_prediction_csv(
      body.at("prediction_csv").get<std::string>(), taxonomy.size(), case_id);

  FrameTrack truth;
  if (reference == "consensus") {
    truth = parse_track_csv(export_consensus(project, case_id), case_id, "consensus");
  } else {
    auto t = store_.track(project, case_id, reference);
    if (!t) throw ServiceError(404, "unknown reference track '" + reference + "'");
    truth = std::move(*t);
  }
  const PredictionLog bound = log.bound_to(taxonomy);
  json out = to_json(eval_report(bound, truth, taxonomy));
  out["cross_entropy"] =
      bound.normalized() ? json(cross_entropy(bound, truth).loss) : json(nullptr);
  out["case_id"] = case_id;
  out["reference"] = reference;
  out["model"] = model;
  if (valid_store_name(model)) {
    std::lock_guard lock(case_mutex(case_key(project, case_id)));
    store_.put_report(project, case_id, "eval-" + model, out.dump(2));
  }
  return json_response(200, out);
}

nlohmann::json InspectorService::openapi() {
  auto op = [](const char* summary) { return json{{"summary", summary}}; };
  const std::string c = "/api/projects/{project}/cases/{case}";
  return {
      {"openapi", "3.0.3"},
      {"info", {{"title", "phaseforge inspector API"}, {"version", "0.1.0"}}},
      {"paths",
       {{"/api/projects",
         {{"post", op("Create a project with a builtin or custom taxonomy")},
          {"get", op("List projects")}}},
        {"/api/projects/{project}/cases",
         {{"post", op("Register a case from its manifest JSON")},
          {"get", op("List cases")}}},
        {c + "/tracks/{annotator}",
         {{"put", op("Upload an annotator track CSV (frame,phase)")}}},
        {c + "/consensus",
         {{"post", op("Unanimity-merge the latest tracks into a draft")}}},
        {c + "/blanks", {{"get", op("Pending blank segments with evidence")}}},
        {c + "/resolutions",
         {{"post", op("Submit an inspector resolution for a pending range")},
          {"get", op("Resolution ledger")}}},
        {c + "/stats",
         {{"get", op("Pairwise agreement and boundary disagreement profile")}}},
        {c + "/export",
         {{"get", op("Final consensus track CSV; 409 while blanks remain")}}},
        {"/api/projects/{project}/evaluate",
         {{"post", op("Evaluate a prediction CSV against a reference track")}}},
        {"/api/spec", {{"get", op("This document")}}}}}};
}

}  // namespace phaseforge
