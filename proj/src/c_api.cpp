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

#include "phaseforge/phaseforge.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "phaseforge/consensus.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/evaluation.hpp"
#include "phaseforge/fixtures.hpp"
#include "phaseforge/formats.hpp"
#include "phaseforge/http_server.hpp"
#include "phaseforge/service.hpp"
#include "phaseforge/splits.hpp"
#include "phaseforge/store.hpp"
#include "phaseforge/stream_replay.hpp"

#ifndef PHASEFORGE_VERSION
#define PHASEFORGE_VERSION "0.0.0"
#endif

struct pf_taxonomy {
  phaseforge::PhaseTaxonomy value;
};
struct pf_track {
  phaseforge::FrameTrack value;
};
struct pf_draft {
  phaseforge::ConsensusDraft value;
};
struct pf_ledger {
  phaseforge::ResolutionLedger value;
};
struct pf_prediction {
  phaseforge::PredictionLog value;
};

namespace {

using namespace phaseforge;

thread_local std::string g_last_error;

pf_status to_status(ErrorCode code) {
  return static_cast<pf_status>(static_cast<int>(code) + 1);
}

template <typename F>
pf_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return PF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PF_ERR_INTERNAL;
  }
}

void require(bool condition, const char* what) {
  if (!condition) {
    throw Error(ErrorCode::kInvalidArgument, std::string("null argument: ") + what);
  }
}

char* dup_string(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

std::string_view bytes_of(const char* bytes, size_t len) {
  return bytes == nullptr ? std::string_view() : std::string_view(bytes, len);
}

std::vector<FrameTrack> gather(const pf_track* const* tracks, size_t count) {
  require(tracks != nullptr || count == 0, "tracks");
  std::vector<FrameTrack> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    require(tracks[i] != nullptr, "tracks[i]");
    out.push_back(tracks[i]->value);
  }
  return out;
}

nlohmann::json ranges_json(const std::vector<Segment>& segments) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : segments) {
    out.push_back({{"start_frame", s.start_frame}, {"end_frame", s.end_frame}});
  }
  return out;
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  if (text == nullptr) return out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

extern "C" {

const char* pf_version(void) { return PHASEFORGE_VERSION; }

const char* pf_status_name(pf_status status) {
  if (status == PF_OK) return "Ok";
  if (status == PF_ERR_INTERNAL) return "Internal";
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::kConflict)) return "Unknown";
  // Names are backed by string literals.
  return error_code_name(static_cast<ErrorCode>(code)).data();
}

int pf_status_is_input_error(pf_status status) {
  if (status == PF_OK || status == PF_ERR_INTERNAL) return 0;
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::kConflict)) return 0;
  return is_io_or_schema_error(static_cast<ErrorCode>(code)) ? 1 : 0;
}

const char* pf_last_error_message(void) { return g_last_error.c_str(); }

void pf_string_free(char* s) { std::free(s); }

pf_status pf_taxonomy_load(const char* name_or_path, pf_taxonomy** out) {
  return guarded([&] {
    require(name_or_path != nullptr && out != nullptr, "taxonomy");
    *out = new pf_taxonomy{resolve_taxonomy(name_or_path)};
  });
}

void pf_taxonomy_free(pf_taxonomy* taxonomy) { delete taxonomy; }

size_t pf_taxonomy_size(const pf_taxonomy* taxonomy) {
  return taxonomy == nullptr ? 0 : taxonomy->value.size();
}

pf_status pf_taxonomy_json(const pf_taxonomy* taxonomy, char** out_json) {
  return guarded([&] {
    require(taxonomy != nullptr && out_json != nullptr, "taxonomy");
    *out_json = dup_string(to_json(taxonomy->value).dump());
  });
}

pf_status pf_track_parse_csv(const char* bytes, size_t len, const char* case_id,
                             const char* annotator_id, pf_track** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = new pf_track{parse_track_csv(bytes_of(bytes, len),
                                        case_id ? case_id : "",
                                        annotator_id ? annotator_id : "")};
  });
}

void pf_track_free(pf_track* track) { delete track; }

size_t pf_track_length(const pf_track* track) {
  return track == nullptr ? 0 : track->value.size();
}

pf_status pf_track_label(const pf_track* track, size_t frame, int* label,
                         int* is_blank) {
  return guarded([&] {
    require(track != nullptr && label != nullptr && is_blank != nullptr, "track");
    if (frame >= track->value.size()) {
      throw Error(ErrorCode::kInvalidArgument, "frame out of range");
    }
    const Label l = track->value.labels[frame];
    *is_blank = l.has_value() ? 0 : 1;
    *label = l.value_or(0);
  });
}

pf_status pf_track_write_csv(const pf_track* track, char** out_csv) {
  return guarded([&] {
    require(track != nullptr && out_csv != nullptr, "track");
    *out_csv = dup_string(write_track_csv(track->value));
  });
}

pf_status pf_track_validate(const pf_track* track, const pf_taxonomy* taxonomy,
                            int64_t expected_frames, int* ok,
                            char** out_report_json) {
  return guarded([&] {
    require(track != nullptr && taxonomy != nullptr && ok != nullptr, "track");
    std::optional<std::size_t> expected;
    if (expected_frames >= 0) expected = static_cast<std::size_t>(expected_frames);
    const ValidationReport report = validate_track(track->value, taxonomy->value, expected);
    *ok = report.ok ? 1 : 0;
    if (out_report_json != nullptr) *out_report_json = dup_string(to_json(report).dump());
  });
}

pf_status pf_consensus_merge(const pf_track* const* tracks, size_t count,
                             pf_draft** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    const auto all = gather(tracks, count);
    *out = new pf_draft{and_merge(all)};
  });
}

pf_status pf_draft_from_track(const pf_track* merged, pf_draft** out) {
  return guarded([&] {
    require(merged != nullptr && out != nullptr, "merged");
    *out = new pf_draft{draft_from_merged(merged->value)};
  });
}

void pf_draft_free(pf_draft* draft) { delete draft; }

pf_status pf_draft_track(const pf_draft* draft, pf_track** out) {
  return guarded([&] {
    require(draft != nullptr && out != nullptr, "draft");
    *out = new pf_track{draft->value.merged};
  });
}

pf_status pf_draft_blanks_json(const pf_draft* draft, char** out_json) {
  return guarded([&] {
    require(draft != nullptr && out_json != nullptr, "draft");
    *out_json = dup_string(to_json(blank_segments(draft->value)).dump());
  });
}

pf_status pf_ledger_parse_json(const char* bytes, size_t len, pf_ledger** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = new pf_ledger{parse_ledger_json(bytes_of(bytes, len))};
  });
}

void pf_ledger_free(pf_ledger* ledger) { delete ledger; }

pf_status pf_draft_resolve(const pf_draft* draft, const pf_ledger* ledger,
                           pf_track** out_track, int* complete,
                           char** out_residual_json) {
  return guarded([&] {
    require(draft != nullptr && ledger != nullptr && out_track != nullptr &&
                complete != nullptr,
            "draft");
    ResolvedTrack resolved = apply_resolutions(draft->value, ledger->value);
    std::string residual;
    if (out_residual_json != nullptr) residual = ranges_json(resolved.residual_blanks).dump();
    *complete = resolved.complete ? 1 : 0;
    *out_track = new pf_track{std::move(resolved.track)};
    if (out_residual_json != nullptr) *out_residual_json = dup_string(residual);
  });
}

pf_status pf_agreement_json(const pf_track* const* tracks, size_t count,
                            char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "out_json");
    const auto all = gather(tracks, count);
    *out_json = dup_string(to_json(pairwise_agreement(all)).dump());
  });
}

pf_status pf_boundary_profile_json(const pf_track* reference,
                                   const pf_track* const* others, size_t count,
                                   int64_t max_distance, char** out_json) {
  return guarded([&] {
    require(reference != nullptr && out_json != nullptr, "reference");
    const auto rest = gather(others, count);
    *out_json = dup_string(
        to_json(boundary_disagreement_profile(reference->value, rest, max_distance)).dump());
  });
}

pf_status pf_prediction_parse_csv(const char* bytes, size_t len,
                                  size_t num_phases, const char* case_id,
                                  pf_prediction** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = new pf_prediction{
        parse_prediction_csv(bytes_of(bytes, len), num_phases, case_id ? case_id : "")};
  });
}

void pf_prediction_free(pf_prediction* log) { delete log; }

size_t pf_prediction_frames(const pf_prediction* log) {
  return log == nullptr ? 0 : log->value.num_frames();
}

int pf_prediction_normalized(const pf_prediction* log) {
  return log != nullptr && log->value.normalized() ? 1 : 0;
}

pf_status pf_eval_report_json(const pf_prediction* log, const pf_track* truth,
                              const pf_taxonomy* taxonomy, char** out_json) {
  return guarded([&] {
    require(log != nullptr && truth != nullptr && taxonomy != nullptr &&
                out_json != nullptr,
            "log");
    *out_json = dup_string(
        to_json(eval_report(log->value, truth->value, taxonomy->value)).dump());
  });
}

pf_status pf_cross_entropy(const pf_prediction* log, const pf_track* truth,
                           const pf_taxonomy* taxonomy, double* out_loss) {
  return guarded([&] {
    require(log != nullptr && truth != nullptr && taxonomy != nullptr &&
                out_loss != nullptr,
            "log");
    *out_loss = cross_entropy(log->value.bound_to(taxonomy->value), truth->value).loss;
  });
}

pf_status pf_delta_table_json(const char* results_csv, size_t len,
                              char** out_json) {
  return guarded([&] {
    require(out_json != nullptr, "out_json");
    const ResultSet results = parse_results_csv(bytes_of(results_csv, len));
    *out_json = dup_string(to_json(delta_table(results)).dump());
  });
}

pf_status pf_fixture_json(const char* name, char** out_json) {
  return guarded([&] {
    require(name != nullptr && out_json != nullptr, "name");
    *out_json = dup_string(fixture_json(name).dump());
  });
}

void pf_split_options_init(pf_split_options* options) {
  if (options == nullptr) return;
  const SplitOptions defaults;
  options->fold_count = defaults.fold_count;
  options->test_size = defaults.test_size;
  options->seed = defaults.seed;
  options->mode = PF_SPLIT_AUTO;
  options->restarts = defaults.restarts;
  options->max_passes = defaults.max_passes;
  options->covariates = nullptr;
}

pf_status pf_splits_json(const char* metadata_csv, size_t len,
                         const pf_split_options* options, char** out_json) {
  return guarded([&] {
    require(options != nullptr && out_json != nullptr, "options");
    const auto cases = parse_metadata_csv(bytes_of(metadata_csv, len));
    SplitOptions o;
    o.fold_count = options->fold_count;
    o.test_size = options->test_size;
    o.seed = options->seed;
    switch (options->mode) {
      case PF_SPLIT_AUTO: o.mode = SplitMode::kAuto; break;
      case PF_SPLIT_EXHAUSTIVE: o.mode = SplitMode::kExhaustive; break;
      case PF_SPLIT_INDEPENDENT: o.mode = SplitMode::kIndependent; break;
      default: throw Error(ErrorCode::kInvalidArgument, "unknown split mode");
    }
    if (options->restarts != 0) o.restarts = options->restarts;
    if (options->max_passes != 0) o.max_passes = options->max_passes;
    o.covariates = split_list(options->covariates);
    *out_json = dup_string(to_json(stratified_splits(cases, o)).dump());
  });
}

pf_status pf_replay(const pf_prediction* log, size_t window, pf_buffer_mode mode,
                    pf_warmup_emission warmup, char** out_decision_csv,
                    char** out_divergence_json) {
  return guarded([&] {
    require(log != nullptr && out_decision_csv != nullptr, "log");
    ReplayPolicy policy;
    policy.window = window;
    policy.mode = mode == PF_BUFFER_WAIT ? BufferMode::kFullWindowWait
                                         : BufferMode::kFeatureQueue;
    policy.warmup_emission = warmup == PF_WARMUP_HOLD_UNKNOWN
                                 ? WarmupEmission::kHoldUnknown
                                 : WarmupEmission::kSuppress;
    const DecisionTrack decisions = replay(log->value, policy);
    std::string divergence;
    if (out_divergence_json != nullptr) {
      divergence = to_json(compare_offline(decisions, log->value)).dump();
    }
    *out_decision_csv = dup_string(write_decision_csv(decisions));
    if (out_divergence_json != nullptr) *out_divergence_json = dup_string(divergence);
  });
}

pf_status pf_service_run(const pf_server_options* options) {
  return guarded([&] {
    require(options != nullptr, "options");
    ProjectStore store(options->store_root && *options->store_root
                           ? std::filesystem::path(options->store_root)
                           : default_store_root());
    InspectorService service(store);
    HttpServerOptions http;
    if (options->host != nullptr) http.host = options->host;
    http.port = options->port;
    if (options->token != nullptr) http.token = options->token;
    if (options->ui_dir != nullptr) http.ui_dir = options->ui_dir;
    HttpServer server(service, http);
    server.listen();
  });
}

}  // extern "C"
