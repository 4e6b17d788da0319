/*
 * Copyright 2026 The PhaseForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PHASEFORGE_PHASEFORGE_H_
#define PHASEFORGE_PHASEFORGE_H_

/* C interface to the phaseforge core. Every function returns a pf_status;
 * on failure pf_last_error_message() describes the error for the calling
 * thread. Strings handed out through char** parameters are NUL-terminated
 * and must be released with pf_string_free. Handles are released with their
 * matching *_free function, which accepts NULL. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(PHASEFORGE_BUILDING_LIBRARY)
#define PF_API __declspec(dllexport)
#else
#define PF_API __declspec(dllimport)
#endif
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_INVALID_ARGUMENT = 1,
  PF_ERR_EMPTY_TRACK = 2,
  PF_ERR_MALFORMED_SEGMENTS = 3,
  PF_ERR_BLANK_IN_TRACK = 4,
  PF_ERR_LENGTH_MISMATCH = 5,
  PF_ERR_CASE_MISMATCH = 6,
  PF_ERR_NOT_ENOUGH_ANNOTATORS = 7,
  PF_ERR_RESOLUTION_OVERREACH = 8,
  PF_ERR_MALFORMED_LEDGER = 9,
  PF_ERR_NO_OVERLAP = 10,
  PF_ERR_UNKNOWN_PHASE = 11,
  PF_ERR_NOT_NORMALIZED = 12,
  PF_ERR_MISSING_CONSENSUS = 13,
  PF_ERR_KEY_MISMATCH = 14,
  PF_ERR_TOO_FEW_CASES = 15,
  PF_ERR_UNKNOWN_COVARIATE = 16,
  PF_ERR_LOG_TOO_SHORT = 17,
  PF_ERR_DENSE_INDEX_VIOLATION = 18,
  PF_ERR_SCHEMA = 19,
  PF_ERR_NUMERIC = 20,
  PF_ERR_NOT_FOUND = 21,
  PF_ERR_IO = 22,
  PF_ERR_CONFLICT = 23,
  PF_ERR_INTERNAL = 100
} pf_status;

typedef struct pf_taxonomy pf_taxonomy;
typedef struct pf_track pf_track;
typedef struct pf_draft pf_draft;
typedef struct pf_ledger pf_ledger;
typedef struct pf_prediction pf_prediction;

/* ---- library ---- */
PF_API const char* pf_version(void);
PF_API const char* pf_status_name(pf_status status);
/* 1 for malformed or unreadable input (bad file, schema, numeric), else 0. */
PF_API int pf_status_is_input_error(pf_status status);
PF_API const char* pf_last_error_message(void);
PF_API void pf_string_free(char* s);

/* ---- taxonomy ---- */
/* Builtin name (cholec, gastrectomy) or path to a taxonomy JSON file. */
PF_API pf_status pf_taxonomy_load(const char* name_or_path, pf_taxonomy** out);
PF_API void pf_taxonomy_free(pf_taxonomy* taxonomy);
PF_API size_t pf_taxonomy_size(const pf_taxonomy* taxonomy);
PF_API pf_status pf_taxonomy_json(const pf_taxonomy* taxonomy, char** out_json);

/* ---- tracks ---- */
PF_API pf_status pf_track_parse_csv(const char* bytes, size_t len,
                                    const char* case_id,
                                    const char* annotator_id, pf_track** out);
PF_API void pf_track_free(pf_track* track);
PF_API size_t pf_track_length(const pf_track* track);
/* Label of one frame; *is_blank is set for BLANK frames. */
PF_API pf_status pf_track_label(const pf_track* track, size_t frame,
                                int* label, int* is_blank);
PF_API pf_status pf_track_write_csv(const pf_track* track, char** out_csv);
/* expected_frames < 0 skips the length check. *ok is 1 when no issues. */
PF_API pf_status pf_track_validate(const pf_track* track,
                                   const pf_taxonomy* taxonomy,
                                   int64_t expected_frames, int* ok,
                                   char** out_report_json);

/* ---- consensus ---- */
PF_API pf_status pf_consensus_merge(const pf_track* const* tracks, size_t count,
                                    pf_draft** out);
/* Draft from a merged track that may contain BLANK frames. */
PF_API pf_status pf_draft_from_track(const pf_track* merged, pf_draft** out);
PF_API void pf_draft_free(pf_draft* draft);
PF_API pf_status pf_draft_track(const pf_draft* draft, pf_track** out);
PF_API pf_status pf_draft_blanks_json(const pf_draft* draft, char** out_json);

PF_API pf_status pf_ledger_parse_json(const char* bytes, size_t len,
                                      pf_ledger** out);
PF_API void pf_ledger_free(pf_ledger* ledger);
/* *complete is 1 when no BLANK frame remains; out_residual_json lists the
 * remaining blank ranges and may be NULL. */
PF_API pf_status pf_draft_resolve(const pf_draft* draft, const pf_ledger* ledger,
                                  pf_track** out_track, int* complete,
                                  char** out_residual_json);

PF_API pf_status pf_agreement_json(const pf_track* const* tracks, size_t count,
                                   char** out_json);
PF_API pf_status pf_boundary_profile_json(const pf_track* reference,
                                          const pf_track* const* others,
                                          size_t count, int64_t max_distance,
                                          char** out_json);

/* ---- evaluation ---- */
/* num_phases 0 infers the width from the header. */
PF_API pf_status pf_prediction_parse_csv(const char* bytes, size_t len,
                                         size_t num_phases, const char* case_id,
                                         pf_prediction** out);
PF_API void pf_prediction_free(pf_prediction* log);
PF_API size_t pf_prediction_frames(const pf_prediction* log);
PF_API int pf_prediction_normalized(const pf_prediction* log);
PF_API pf_status pf_eval_report_json(const pf_prediction* log,
                                     const pf_track* truth,
                                     const pf_taxonomy* taxonomy,
                                     char** out_json);
/* Columns are bound to the taxonomy ids in order before scoring. */
PF_API pf_status pf_cross_entropy(const pf_prediction* log,
                                  const pf_track* truth,
                                  const pf_taxonomy* taxonomy, double* out_loss);
/* Results CSV (model,split,annotation,ap) to the delta table JSON. */
PF_API pf_status pf_delta_table_json(const char* results_csv, size_t len,
                                     char** out_json);
PF_API pf_status pf_fixture_json(const char* name, char** out_json);

/* ---- splits ---- */
typedef enum pf_split_mode {
  PF_SPLIT_AUTO = 0,
  PF_SPLIT_EXHAUSTIVE = 1,
  PF_SPLIT_INDEPENDENT = 2
} pf_split_mode;

typedef struct pf_split_options {
  size_t fold_count;
  size_t test_size;
  uint64_t seed;
  pf_split_mode mode;
  size_t restarts;   /* 0 uses the default */
  size_t max_passes; /* 0 uses the default */
  const char* covariates; /* comma separated; NULL or "" for the standard set */
} pf_split_options;

PF_API void pf_split_options_init(pf_split_options* options);
PF_API pf_status pf_splits_json(const char* metadata_csv, size_t len,
                                const pf_split_options* options,
                                char** out_json);

/* ---- streaming replay ---- */
typedef enum pf_buffer_mode {
  PF_BUFFER_QUEUE = 0,
  PF_BUFFER_WAIT = 1
} pf_buffer_mode;

typedef enum pf_warmup_emission {
  PF_WARMUP_SUPPRESS = 0,
  PF_WARMUP_HOLD_UNKNOWN = 1
} pf_warmup_emission;

/* Decision CSV (frame,phase,state) plus an optional divergence report
 * against offline argmax. out_divergence_json may be NULL. */
PF_API pf_status pf_replay(const pf_prediction* log, size_t window,
                           pf_buffer_mode mode, pf_warmup_emission warmup,
                           char** out_decision_csv, char** out_divergence_json);

/* ---- service ---- */
typedef struct pf_server_options {
  const char* store_root; /* NULL: PHASEFORGE_HOME or ~/.phaseforge */
  const char* host;       /* NULL: 127.0.0.1 */
  int port;
  const char* token;      /* NULL or "": no authentication */
  const char* ui_dir;     /* NULL: plain-text index */
} pf_server_options;

/* Serves the inspector API until the process is stopped. */
PF_API pf_status pf_service_run(const pf_server_options* options);

#ifdef __cplusplus
}
#endif

#endif /* PHASEFORGE_PHASEFORGE_H_ */
