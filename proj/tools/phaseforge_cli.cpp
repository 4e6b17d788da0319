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

// phaseforge command-line tool. Talks to the library only through the C API.
//
// Exit codes: 0 success, 2 validation or domain failure, 1 I/O or schema
// error (unreadable file, malformed CSV/JSON, bad arguments).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "phaseforge/phaseforge.h"

namespace {

using nlohmann::json;

constexpr int kExitInput = 1;
constexpr int kExitValidation = 2;

// Thrown to unwind a subcommand with a specific exit code.
struct Exit {
  int code;
};

[[noreturn]] void fail(int code, const std::string& message) {
  std::cerr << "phaseforge: " << message << "\n";
  throw Exit{code};
}

void check(pf_status status) {
  if (status == PF_OK) return;
  fail(pf_status_is_input_error(status) ? kExitInput : kExitValidation,
       std::string(pf_status_name(status)) + ": " + pf_last_error_message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitInput, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    fail(kExitInput, "cannot write " + path);
  }
}

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  pf_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Taxonomy = std::unique_ptr<pf_taxonomy, Deleter<pf_taxonomy, pf_taxonomy_free>>;
using Track = std::unique_ptr<pf_track, Deleter<pf_track, pf_track_free>>;
using Draft = std::unique_ptr<pf_draft, Deleter<pf_draft, pf_draft_free>>;
using Ledger = std::unique_ptr<pf_ledger, Deleter<pf_ledger, pf_ledger_free>>;
using Prediction = std::unique_ptr<pf_prediction, Deleter<pf_prediction, pf_prediction_free>>;

std::string stem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

Taxonomy load_taxonomy(const std::string& name) {
  pf_taxonomy* t = nullptr;
  check(pf_taxonomy_load(name.c_str(), &t));
  return Taxonomy(t);
}

Track load_track(const std::string& path, const std::string& case_id,
                 const std::string& annotator) {
  const std::string bytes = read_file(path);
  pf_track* t = nullptr;
  check(pf_track_parse_csv(bytes.data(), bytes.size(), case_id.c_str(),
                           annotator.c_str(), &t));
  return Track(t);
}

Prediction load_prediction(const std::string& path, std::size_t phases,
                           const std::string& case_id) {
  const std::string bytes = read_file(path);
  pf_prediction* p = nullptr;
  check(pf_prediction_parse_csv(bytes.data(), bytes.size(), phases, case_id.c_str(), &p));
  return Prediction(p);
}

void emit(const std::string& out_path, const std::string& bytes) {
  if (out_path.empty() || out_path == "-") {
    std::cout << bytes;
  } else {
    write_file(out_path, bytes);
  }
}

std::string fmt(double v, int places = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string range_list(const json& ranges) {
  std::string out;
  for (const auto& r : ranges) {
    if (!out.empty()) out += ", ";
    out += "[" + std::to_string(r.at("start_frame").get<long long>()) + "," +
           std::to_string(r.at("end_frame").get<long long>()) + "]";
  }
  return out.empty() ? "none" : out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaseforge: surgical phase annotation workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pf_version()));
  std::function<void()> run;

  // validate
  std::string v_track, v_taxonomy = "cholec";
  long long v_frames = -1;
  bool v_json = false;
  auto* validate = app.add_subcommand("validate", "Check a track CSV against a taxonomy");
  validate->add_option("--track", v_track, "Track CSV")->required();
  validate->add_option("--taxonomy", v_taxonomy, "Builtin name or taxonomy JSON path");
  validate->add_option("--frames", v_frames, "Expected frame count");
  validate->add_flag("--json", v_json, "Print the full report as JSON");
  validate->callback([&] {
    run = [&] {
      auto tax = load_taxonomy(v_taxonomy);
      auto track = load_track(v_track, stem(v_track), stem(v_track));
      int ok = 0;
      char* report = nullptr;
      check(pf_track_validate(track.get(), tax.get(), v_frames, &ok, &report));
      const json r = json::parse(take(report));
      if (v_json) {
        std::cout << r.dump(2) << "\n";
      } else {
        std::cout << v_track << ": " << pf_track_length(track.get()) << " frames, "
                  << r.at("issues").size() << " issue(s)\n";
        std::size_t shown = 0;
        for (const auto& issue : r.at("issues")) {
          if (++shown > 20) {
            std::cout << "  ...\n";
            break;
          }
          std::cout << "  " << issue.dump() << "\n";
        }
      }
      if (!ok) throw Exit{kExitValidation};
    };
  });

  // consensus
  std::string c_out, c_case = "case", c_blanks;
  std::vector<std::string> c_tracks;
  auto* consensus = app.add_subcommand("consensus", "Unanimity-merge annotator tracks");
  consensus->add_option("--out", c_out, "Draft CSV output (- for stdout)")->required();
  consensus->add_option("--case", c_case, "Case id shared by the tracks");
  consensus->add_option("--blanks", c_blanks, "Write blank segments with evidence as JSON");
  consensus->add_option("tracks", c_tracks, "Annotator track CSVs (annotator id = file stem)")
      ->required();
  consensus->callback([&] {
    run = [&] {
      std::vector<Track> tracks;
      std::vector<const pf_track*> raw;
      for (const auto& path : c_tracks) {
        tracks.push_back(load_track(path, c_case, stem(path)));
        raw.push_back(tracks.back().get());
      }
      pf_draft* d = nullptr;
      check(pf_consensus_merge(raw.data(), raw.size(), &d));
      Draft draft(d);
      pf_track* merged = nullptr;
      check(pf_draft_track(draft.get(), &merged));
      Track merged_track(merged);
      char* csv = nullptr;
      check(pf_track_write_csv(merged_track.get(), &csv));
      emit(c_out, take(csv));
      char* blanks = nullptr;
      check(pf_draft_blanks_json(draft.get(), &blanks));
      const std::string blanks_json = take(blanks);
      if (!c_blanks.empty()) write_file(c_blanks, json::parse(blanks_json).dump(2) + "\n");
      const json segs = json::parse(blanks_json);
      std::size_t blank_frames = 0;
      for (const auto& s : segs) {
        blank_frames += s.at("end_frame").get<std::size_t>() -
                        s.at("start_frame").get<std::size_t>() + 1;
      }
      std::cerr << "merged " << tracks.size() << " tracks, "
                << pf_track_length(merged_track.get()) << " frames, " << blank_frames
                << " blank frame(s) in " << segs.size() << " segment(s)\n";
    };
  });

  // resolve
  std::string r_draft, r_ledger, r_out;
  auto* resolve = app.add_subcommand("resolve", "Apply an inspector ledger to a draft");
  resolve->add_option("--draft", r_draft, "Draft CSV")->required();
  resolve->add_option("--ledger", r_ledger, "Ledger JSON")->required();
  resolve->add_option("--out", r_out, "Resolved CSV output (default stdout)");
  resolve->callback([&] {
    run = [&] {
      auto merged = load_track(r_draft, stem(r_draft), "consensus");
      const std::string ledger_bytes = read_file(r_ledger);
      pf_ledger* l = nullptr;
      check(pf_ledger_parse_json(ledger_bytes.data(), ledger_bytes.size(), &l));
      Ledger ledger(l);
      pf_draft* d = nullptr;
      check(pf_draft_from_track(merged.get(), &d));
      Draft draft(d);
      pf_track* resolved = nullptr;
      int complete = 0;
      char* residual = nullptr;
      check(pf_draft_resolve(draft.get(), ledger.get(), &resolved, &complete, &residual));
      Track track(resolved);
      const json rest = json::parse(take(residual));
      char* csv = nullptr;
      check(pf_track_write_csv(track.get(), &csv));
      emit(r_out, take(csv));
      std::cerr << (complete ? "complete" : "incomplete") << "; remaining blanks: "
                << range_list(rest) << "\n";
    };
  });

  // eval
  std::string e_pred, e_truth, e_taxonomy = "cholec", e_report;
  auto* eval = app.add_subcommand("eval", "Per-phase AP, mAP and confusion of a prediction log");
  eval->add_option("--pred", e_pred, "Prediction CSV")->required();
  eval->add_option("--truth", e_truth, "Ground-truth track CSV")->required();
  eval->add_option("--taxonomy", e_taxonomy, "Builtin name or taxonomy JSON path");
  eval->add_option("--report", e_report, "Write the full report JSON here");
  eval->callback([&] {
    run = [&] {
      auto tax = load_taxonomy(e_taxonomy);
      auto truth = load_track(e_truth, "case", "truth");
      auto pred = load_prediction(e_pred, pf_taxonomy_size(tax.get()), "case");
      char* report = nullptr;
      check(pf_eval_report_json(pred.get(), truth.get(), tax.get(), &report));
      json r = json::parse(take(report));
      if (pf_prediction_normalized(pred.get())) {
        double loss = 0;
        check(pf_cross_entropy(pred.get(), truth.get(), tax.get(), &loss));
        r["cross_entropy"] = loss;
      } else {
        r["cross_entropy"] = nullptr;
      }
      if (!e_report.empty()) write_file(e_report, r.dump(2) + "\n");
      std::cout << "frames " << r.at("evaluated_frames") << "  mAP "
                << fmt(r.at("map").get<double>());
      if (!r.at("cross_entropy").is_null()) {
        std::cout << "  cross-entropy " << fmt(r.at("cross_entropy").get<double>());
      }
      std::cout << "\n";
      for (const auto& p : r.at("per_phase")) {
        std::cout << "  phase " << p.at("phase_id") << "  AP "
                  << (p.at("ap").is_null() ? std::string("ABSENT")
                                           : fmt(p.at("ap").get<double>()))
                  << "  support " << p.at("support") << "\n";
      }
    };
  });

  // deltas
  std::string d_results, d_out;
  auto* deltas = app.add_subcommand("deltas", "Consensus-minus-annotation AP delta table");
  deltas->add_option("--results", d_results, "Results CSV (model,split,annotation,ap)")
      ->required();
  deltas->add_option("--out", d_out, "Write the table JSON here");
  deltas->callback([&] {
    run = [&] {
      const std::string bytes = read_file(d_results);
      char* table = nullptr;
      check(pf_delta_table_json(bytes.data(), bytes.size(), &table));
      const json t = json::parse(take(table));
      if (!d_out.empty()) write_file(d_out, t.dump(2) + "\n");
      for (const auto& row : t.at("rows")) {
        std::cout << row.at("model").get<std::string>() << "  "
                  << row.at("split").get<std::string>();
        for (const auto& [ann, shown] : row.at("deltas_display").items()) {
          std::cout << "  " << ann << " " << shown.get<std::string>();
        }
        std::cout << "\n";
      }
      for (const auto& [model, mean] : t.at("mean_delta_by_model").items()) {
        std::cout << "mean " << model << "  " << fmt(mean.get<double>()) << "\n";
      }
    };
  });

  // splits
  std::string s_metadata, s_mode = "auto", s_covariates, s_out;
  std::size_t s_folds = 1, s_test = 1, s_restarts = 0;
  std::uint64_t s_seed = 0;
  auto* splits = app.add_subcommand("splits", "Covariate-balanced cross-validation folds");
  splits->add_option("--metadata", s_metadata, "Metadata CSV")->required();
  splits->add_option("--folds", s_folds, "Fold count")->required();
  splits->add_option("--test", s_test, "Test cases per fold")->required();
  splits->add_option("--seed", s_seed, "RNG seed");
  splits->add_option("--mode", s_mode, "auto | exhaustive | independent")
      ->check(CLI::IsMember({"auto", "exhaustive", "independent"}));
  splits->add_option("--covariates", s_covariates, "Comma-separated covariate names");
  splits->add_option("--restarts", s_restarts, "Random restarts");
  splits->add_option("--out", s_out, "Write the plan JSON here (default stdout)");
  splits->callback([&] {
    run = [&] {
      const std::string bytes = read_file(s_metadata);
      pf_split_options o;
      pf_split_options_init(&o);
      o.fold_count = s_folds;
      o.test_size = s_test;
      o.seed = s_seed;
      o.mode = s_mode == "exhaustive"    ? PF_SPLIT_EXHAUSTIVE
               : s_mode == "independent" ? PF_SPLIT_INDEPENDENT
                                         : PF_SPLIT_AUTO;
      if (s_restarts != 0) o.restarts = s_restarts;
      o.covariates = s_covariates.c_str();
      char* plan = nullptr;
      check(pf_splits_json(bytes.data(), bytes.size(), &o, &plan));
      emit(s_out, json::parse(take(plan)).dump(2) + "\n");
    };
  });

  // replay
  std::string p_pred, p_mode = "queue", p_warmup = "suppress", p_out;
  std::size_t p_window = 16;
  auto* replay = app.add_subcommand("replay", "Replay a prediction log as an online stream");
  replay->add_option("--pred", p_pred, "Prediction CSV")->required();
  replay->add_option("--window", p_window, "Clip length in frames");
  replay->add_option("--mode", p_mode, "queue | wait")
      ->check(CLI::IsMember({"queue", "wait"}));
  replay->add_option("--warmup", p_warmup, "suppress | hold")
      ->check(CLI::IsMember({"suppress", "hold"}));
  replay->add_option("--out", p_out, "Decision CSV output (default stdout)");
  replay->callback([&] {
    run = [&] {
      auto pred = load_prediction(p_pred, 0, stem(p_pred));
      char* csv = nullptr;
      char* divergence = nullptr;
      check(pf_replay(pred.get(), p_window,
                      p_mode == "wait" ? PF_BUFFER_WAIT : PF_BUFFER_QUEUE,
                      p_warmup == "hold" ? PF_WARMUP_HOLD_UNKNOWN : PF_WARMUP_SUPPRESS,
                      &csv, &divergence));
      emit(p_out, take(csv));
      std::cerr << "offline divergence: " << take(divergence) << "\n";
    };
  });

  // stats
  std::vector<std::string> a_tracks;
  std::size_t a_reference = 0;
  long long a_cap = 120;
  auto* stats = app.add_subcommand("stats", "Inter-annotator agreement and boundary profile");
  stats->add_option("tracks", a_tracks, "Annotator track CSVs")->required();
  stats->add_option("--reference", a_reference, "Index of the reference track");
  stats->add_option("--max-distance", a_cap, "Boundary distance cap in frames");
  stats->callback([&] {
    run = [&] {
      std::vector<Track> tracks;
      std::vector<const pf_track*> raw;
      for (const auto& path : a_tracks) {
        tracks.push_back(load_track(path, "case", stem(path)));
        raw.push_back(tracks.back().get());
      }
      if (a_reference >= raw.size()) fail(kExitInput, "--reference out of range");
      char* agreement = nullptr;
      check(pf_agreement_json(raw.data(), raw.size(), &agreement));
      std::vector<const pf_track*> others;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i != a_reference) others.push_back(raw[i]);
      }
      char* profile = nullptr;
      check(pf_boundary_profile_json(raw[a_reference], others.data(), others.size(),
                                     a_cap, &profile));
      const json out = {{"agreement", json::parse(take(agreement))},
                        {"boundary", json::parse(take(profile))}};
      std::cout << out.dump(2) << "\n";
    };
  });

  // fixture
  std::string f_name;
  auto* fixture = app.add_subcommand("fixture", "Print an embedded reference fixture");
  fixture->add_option("name", f_name, "Fixture name")->required();
  fixture->callback([&] {
    run = [&] {
      char* out = nullptr;
      check(pf_fixture_json(f_name.c_str(), &out));
      std::cout << json::parse(take(out)).dump(2) << "\n";
    };
  });

  // serve
  std::string sv_store, sv_host = "127.0.0.1", sv_token, sv_ui;
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the inspector HTTP service");
  serve->add_option("--port", sv_port, "Listen port");
  serve->add_option("--store", sv_store, "Store root (default $PHASEFORGE_HOME or ~/.phaseforge)");
  serve->add_option("--host", sv_host, "Listen address");
  serve->add_option("--token", sv_token, "Require this bearer token");
  serve->add_option("--ui", sv_ui, "Directory with the inspector UI build");
  serve->callback([&] {
    run = [&] {
      pf_server_options o{sv_store.empty() ? nullptr : sv_store.c_str(), sv_host.c_str(),
                          sv_port, sv_token.c_str(), sv_ui.empty() ? nullptr : sv_ui.c_str()};
      std::cerr << "serving on http://" << sv_host << ":" << sv_port << "\n";
      check(pf_service_run(&o));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  try {
    if (run) run();
  } catch (const Exit& e) {
    return e.code;
  } catch (const json::exception& e) {
    std::cerr << "phaseforge: unexpected library output: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
