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

#include "phaseforge/formats.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "phaseforge/error.hpp"

namespace phaseforge {
namespace {

using nlohmann::json;

// Splits into lines, tolerating CRLF and one trailing newline.
std::vector<std::string_view> split_lines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

std::string_view strip_bom(std::string_view bytes) {
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  return bytes;
}

Error schema_error(const std::string& what, std::size_t line_no) {
  return Error(ErrorCode::kSchemaError,
               "line " + std::to_string(line_no) + ": " + what);
}

std::int64_t parse_int(std::string_view text, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw schema_error("'" + std::string(text) + "' is not an integer", line_no);
  }
  return v;
}

// Header line plus data lines with the expected field count.
struct CsvTable {
  std::vector<std::string_view> header;
  std::vector<std::vector<std::string_view>> rows;
};

CsvTable read_csv(std::string_view bytes) {
  auto lines = split_lines(strip_bom(bytes));
  if (lines.empty() || lines.front().empty()) {
    throw Error(ErrorCode::kSchemaError, "missing CSV header");
  }
  CsvTable table;
  table.header = split_fields(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      throw schema_error("empty line", i + 1);
    }
    auto fields = split_fields(lines[i]);
    if (fields.size() != table.header.size()) {
      throw schema_error("expected " + std::to_string(table.header.size()) +
                             " fields, got " + std::to_string(fields.size()),
                         i + 1);
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void check_dense(std::int64_t frame, std::int64_t expected,
                 std::size_t line_no) {
  if (frame != expected) {
    throw Error(ErrorCode::kDenseIndexViolation,
                "line " + std::to_string(line_no) + ": frame " +
                    std::to_string(frame) + " where " +
                    std::to_string(expected) + " was expected");
  }
}

std::string label_text(const Label& label) {
  return label ? std::to_string(*label) : std::string("BLANK");
}

Label parse_label(std::string_view text, std::size_t line_no) {
  if (text == "BLANK") return kBlank;
  return static_cast<PhaseId>(parse_int(text, line_no));
}

std::optional<double> parse_optional_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  return parse_double(text);
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

const char* state_name(FrameState s) {
  return s == FrameState::kWarmup ? "warmup" : "decided";
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kSchemaError,
                std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError,
                std::string("field '") + key + "': " + e.what());
  }
}

json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("invalid JSON: ") + e.what());
  }
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) {
    throw Error(ErrorCode::kSchemaError,
                std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw Error(ErrorCode::kNumericError,
                "'" + std::string(text) + "' is not a number");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNumericError,
                "'" + std::string(text) + "' is not finite");
  }
  return v;
}

FrameTrack parse_track_csv(std::string_view bytes, std::string case_id,
                           std::string annotator_id) {
  const CsvTable table = read_csv(bytes);
  if (table.header.size() != 2 || table.header[0] != "frame" ||
      table.header[1] != "phase") {
    throw Error(ErrorCode::kSchemaError, "track header must be 'frame,phase'");
  }
  FrameTrack track;
  track.case_id = std::move(case_id);
  track.annotator_id = std::move(annotator_id);
  track.labels.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    check_dense(parse_int(row[0], i + 2), static_cast<std::int64_t>(i), i + 2);
    track.labels.push_back(parse_label(row[1], i + 2));
  }
  track.provenance =
      track.has_blank() ? TrackProvenance::kDraft : TrackProvenance::kAnnotator;
  return track;
}

std::string write_track_csv(const FrameTrack& track) {
  std::string out = "frame,phase\n";
  out.reserve(out.size() + track.size() * 8);
  for (std::size_t k = 0; k < track.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += label_text(track.labels[k]);
    out += '\n';
  }
  return out;
}

PredictionLog parse_prediction_csv(std::string_view bytes,
                                   std::size_t num_phases,
                                   std::string case_id) {
  const CsvTable table = read_csv(bytes);
  if (table.header.empty() || table.header[0] != "frame") {
    throw Error(ErrorCode::kSchemaError,
                "prediction header must start with 'frame'");
  }
  const std::size_t c = table.header.size() - 1;
  if (c == 0 || (num_phases != 0 && c != num_phases)) {
    throw Error(ErrorCode::kSchemaError,
                "prediction header has " + std::to_string(c) +
                    " confidence columns, expected " +
                    std::to_string(num_phases));
  }
  for (std::size_t j = 0; j < c; ++j) {
    if (table.header[j + 1] != "c" + std::to_string(j)) {
      throw Error(ErrorCode::kSchemaError,
                  "prediction column " + std::to_string(j + 1) +
                      " must be named c" + std::to_string(j));
    }
  }
  std::vector<double> values;
  values.reserve(table.rows.size() * c);
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::int64_t frame = parse_int(row[0], i + 2);
    if (i == 0) {
      if (frame < 0) throw schema_error("negative frame index", 2);
      offset = frame;
    } else {
      check_dense(frame, offset + static_cast<std::int64_t>(i), i + 2);
    }
    for (std::size_t j = 1; j <= c; ++j) values.push_back(parse_double(row[j]));
  }
  return PredictionLog(std::move(case_id), c, std::move(values), offset);
}

std::string write_prediction_csv(const PredictionLog& log) {
  std::string out = "frame";
  for (std::size_t j = 0; j < log.num_phases(); ++j) {
    out += ",c" + std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < log.num_frames(); ++i) {
    out += std::to_string(log.frame_offset() + static_cast<std::int64_t>(i));
    for (double v : log.row(i)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<CaseMetadata> parse_metadata_csv(std::string_view bytes) {
  static constexpr std::string_view kColumns[] = {
      "case_id", "age", "operation_minutes", "bleeding_ml", "bmi",
      "recording_system"};
  const CsvTable table = read_csv(bytes);
  if (table.header.size() < std::size(kColumns)) {
    throw Error(ErrorCode::kSchemaError, "metadata header is too short");
  }
  for (std::size_t j = 0; j < std::size(kColumns); ++j) {
    if (table.header[j] != kColumns[j]) {
      throw Error(ErrorCode::kSchemaError,
                  "metadata column " + std::to_string(j + 1) + " must be '" +
                      std::string(kColumns[j]) + "'");
    }
  }
  std::set<std::string> ids;
  std::vector<CaseMetadata> cases;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    CaseMetadata m;
    m.case_id = std::string(row[0]);
    if (m.case_id.empty() || !ids.insert(m.case_id).second) {
      throw schema_error("missing or duplicate case_id", i + 2);
    }
    m.age = parse_optional_double(row[1]);
    m.operation_minutes = parse_optional_double(row[2]);
    m.bleeding_ml = parse_optional_double(row[3]);
    m.bmi = parse_optional_double(row[4]);
    auto system = parse_recording_system(row[5]);
    if (!system) {
      throw schema_error("recording_system must be si, xi or other", i + 2);
    }
    m.recording_system = *system;
    for (std::size_t j = std::size(kColumns); j < row.size(); ++j) {
      if (auto v = parse_optional_double(row[j])) {
        m.extra[std::string(table.header[j])] = *v;
      }
    }
    for (const auto& v : {m.age, m.operation_minutes, m.bleeding_ml, m.bmi}) {
      if (v && *v < 0.0) {
        throw Error(ErrorCode::kNumericError,
                    "line " + std::to_string(i + 2) +
                        ": covariates must be >= 0");
      }
    }
    cases.push_back(std::move(m));
  }
  return cases;
}

std::string write_metadata_csv(const std::vector<CaseMetadata>& cases) {
  std::set<std::string> extra_keys;
  for (const auto& c : cases) {
    for (const auto& [k, v] : c.extra) extra_keys.insert(k);
  }
  std::string out = "case_id,age,operation_minutes,bleeding_ml,bmi,recording_system";
  for (const auto& k : extra_keys) out += "," + k;
  out += '\n';
  for (const auto& c : cases) {
    out += c.case_id + ',' + optional_text(c.age) + ',' +
           optional_text(c.operation_minutes) + ',' +
           optional_text(c.bleeding_ml) + ',' + optional_text(c.bmi) + ',' +
           std::string(recording_system_name(c.recording_system));
    for (const auto& k : extra_keys) {
      auto it = c.extra.find(k);
      out += ',';
      if (it != c.extra.end()) out += format_double(it->second);
    }
    out += '\n';
  }
  return out;
}

std::string write_decision_csv(const DecisionTrack& decisions) {
  std::string out = "frame,phase,state\n";
  for (std::size_t i = 0; i < decisions.track.size(); ++i) {
    out += std::to_string(decisions.frame_offset + static_cast<std::int64_t>(i));
    out += ',';
    out += label_text(decisions.track.labels[i]);
    out += ',';
    out += state_name(decisions.states[i]);
    out += '\n';
  }
  return out;
}

DecisionTrack parse_decision_csv(std::string_view bytes) {
  const CsvTable table = read_csv(bytes);
  if (table.header.size() != 3 || table.header[0] != "frame" ||
      table.header[1] != "phase" || table.header[2] != "state") {
    throw Error(ErrorCode::kSchemaError,
                "decision header must be 'frame,phase,state'");
  }
  DecisionTrack out;
  out.track.annotator_id = "replay";
  out.track.provenance = TrackProvenance::kDecision;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::int64_t frame = parse_int(row[0], i + 2);
    if (i == 0) {
      out.frame_offset = frame;
    } else {
      check_dense(frame, out.frame_offset + static_cast<std::int64_t>(i), i + 2);
    }
    out.track.labels.push_back(parse_label(row[1], i + 2));
    if (row[2] == "warmup") {
      out.states.push_back(FrameState::kWarmup);
    } else if (row[2] == "decided") {
      out.states.push_back(FrameState::kDecided);
    } else {
      throw schema_error("state must be warmup or decided", i + 2);
    }
  }
  return out;
}

ResultSet parse_results_csv(std::string_view bytes) {
  const CsvTable table = read_csv(bytes);
  if (table.header.size() != 4 || table.header[0] != "model" ||
      table.header[1] != "split" || table.header[2] != "annotation" ||
      table.header[3] != "ap") {
    throw Error(ErrorCode::kSchemaError,
                "results header must be 'model,split,annotation,ap'");
  }
  ResultSet results;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    ResultKey key{std::string(row[0]), std::string(row[1]),
                  std::string(row[2])};
    if (!results.emplace(key, Decimal::parse(row[3])).second) {
      throw schema_error("duplicate result cell", i + 2);
    }
  }
  return results;
}

std::string write_results_csv(const ResultSet& results) {
  std::string out = "model,split,annotation,ap\n";
  for (const auto& [key, ap] : results) {
    out += key.model + ',' + key.split + ',' + key.annotation + ',' +
           ap.to_string() + '\n';
  }
  return out;
}

std::string format_utc(UtcTime t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

UtcTime parse_utc(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0;
  int h = 0, mi = 0, s = 0;
  char z = 0;
  const std::string str(text);
  if (std::sscanf(str.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%c", &y, &mo, &d, &h,
                  &mi, &s, &z) != 7 ||
      z != 'Z' || str.size() != 20) {
    throw Error(ErrorCode::kSchemaError,
                "timestamp '" + str + "' is not YYYY-MM-DDTHH:MM:SSZ");
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw Error(ErrorCode::kSchemaError, "timestamp '" + str + "' is invalid");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

CaseManifest parse_manifest_json(std::string_view bytes) {
  const json j = parse_json(bytes);
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "manifest must be an object");
  CaseManifest m;
  m.case_id = get_field<std::string>(j, "case_id");
  if (j.contains("fps")) {
    const json& fps = j.at("fps");
    if (fps.is_number_integer()) {
      m.fps = {fps.get<std::int64_t>(), 1};
    } else {
      m.fps = {get_field<std::int64_t>(fps, "num"),
               get_field<std::int64_t>(fps, "den")};
    }
    if (m.fps.num <= 0 || m.fps.den <= 0) {
      throw Error(ErrorCode::kSchemaError, "fps must be positive");
    }
  }
  const auto frames = get_field<std::int64_t>(j, "frame_count");
  if (frames < 1) throw Error(ErrorCode::kSchemaError, "frame_count must be >= 1");
  m.frame_count = static_cast<std::size_t>(frames);
  if (j.contains("recording_system")) {
    auto system = parse_recording_system(get_field<std::string>(j, "recording_system"));
    if (!system) throw Error(ErrorCode::kSchemaError, "unknown recording_system");
    m.recording_system = *system;
  }
  m.metadata.case_id = m.case_id;
  m.metadata.recording_system = m.recording_system;
  if (j.contains("metadata")) {
    const json& md = j.at("metadata");
    m.metadata.age = optional_number(md, "age");
    m.metadata.operation_minutes = optional_number(md, "operation_minutes");
    m.metadata.bleeding_ml = optional_number(md, "bleeding_ml");
    m.metadata.bmi = optional_number(md, "bmi");
    if (md.contains("extra")) {
      m.metadata.extra = get_field<std::map<std::string, double>>(md, "extra");
    }
  }
  if (j.contains("track_files")) {
    m.track_files = get_field<std::map<std::string, std::string>>(j, "track_files");
  }
  if (j.contains("prediction_files")) {
    m.prediction_files =
        get_field<std::map<std::string, std::string>>(j, "prediction_files");
  }
  return m;
}

nlohmann::json to_json(const CaseManifest& m) {
  json md = {{"age", optional_json(m.metadata.age)},
             {"operation_minutes", optional_json(m.metadata.operation_minutes)},
             {"bleeding_ml", optional_json(m.metadata.bleeding_ml)},
             {"bmi", optional_json(m.metadata.bmi)},
             {"extra", m.metadata.extra}};
  return {{"case_id", m.case_id},
          {"fps", {{"num", m.fps.num}, {"den", m.fps.den}}},
          {"frame_count", m.frame_count},
          {"recording_system", recording_system_name(m.recording_system)},
          {"metadata", md},
          {"track_files", m.track_files},
          {"prediction_files", m.prediction_files}};
}

std::string write_manifest_json(const CaseManifest& manifest) {
  return to_json(manifest).dump(2) + "\n";
}

CaseManifest load_manifest(const std::filesystem::path& path) {
  CaseManifest m = parse_manifest_json(read_file(path));
  const auto base = path.parent_path();
  auto check = [&](const std::map<std::string, std::string>& files) {
    for (const auto& [id, file] : files) {
      std::filesystem::path p(file);
      if (p.is_relative()) p = base / p;
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorCode::kNotFound,
                    "manifest references missing file " + p.string());
      }
    }
  };
  check(m.track_files);
  check(m.prediction_files);
  return m;
}

nlohmann::json to_json(const ResolutionLedger& ledger) {
  json entries = json::array();
  for (const auto& e : ledger.entries) {
    entries.push_back({{"start_frame", e.start_frame},
                       {"end_frame", e.end_frame},
                       {"assigned_label", e.assigned_label},
                       {"inspector_id", e.inspector_id},
                       {"timestamp", format_utc(e.timestamp)},
                       {"note", e.note}});
  }
  return {{"entries", entries}};
}

ResolutionLedger parse_ledger_json(std::string_view bytes) {
  const json j = parse_json(bytes);
  if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array()) {
    throw Error(ErrorCode::kSchemaError, "ledger must have an 'entries' array");
  }
  ResolutionLedger ledger;
  for (const json& e : j.at("entries")) {
    Resolution r;
    r.start_frame = get_field<std::int64_t>(e, "start_frame");
    r.end_frame = get_field<std::int64_t>(e, "end_frame");
    r.assigned_label = get_field<PhaseId>(e, "assigned_label");
    r.inspector_id = get_field<std::string>(e, "inspector_id");
    r.timestamp = parse_utc(get_field<std::string>(e, "timestamp"));
    if (e.contains("note")) r.note = get_field<std::string>(e, "note");
    ledger.entries.push_back(std::move(r));
  }
  return ledger;
}

std::string write_ledger_json(const ResolutionLedger& ledger) {
  return to_json(ledger).dump(2) + "\n";
}

PhaseTaxonomy parse_taxonomy_json(std::string_view bytes) {
  const json j = parse_json(bytes);
  SurgeryKind kind = SurgeryKind::kCustom;
  if (j.contains("surgery_kind")) {
    auto parsed = parse_surgery_kind(get_field<std::string>(j, "surgery_kind"));
    if (!parsed) throw Error(ErrorCode::kSchemaError, "unknown surgery_kind");
    kind = *parsed;
  }
  if (!j.contains("phases") || !j.at("phases").is_array()) {
    throw Error(ErrorCode::kSchemaError, "taxonomy needs a 'phases' array");
  }
  std::vector<Phase> phases;
  for (const json& p : j.at("phases")) {
    Phase phase{get_field<PhaseId>(p, "id"), get_field<std::string>(p, "name"),
                PhaseKind::kSurgical};
    if (p.contains("kind")) {
      const auto k = get_field<std::string>(p, "kind");
      if (k == "non_surgical") {
        phase.kind = PhaseKind::kNonSurgical;
      } else if (k != "surgical") {
        throw Error(ErrorCode::kSchemaError, "phase kind must be surgical or non_surgical");
      }
    }
    phases.push_back(std::move(phase));
  }
  try {
    return PhaseTaxonomy(kind, std::move(phases));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, e.what());
  }
}

PhaseTaxonomy resolve_taxonomy(std::string_view name_or_path) {
  if (name_or_path == "cholec" || name_or_path == "cholecystectomy" ||
      name_or_path == "gastrectomy" || name_or_path == "gastric") {
    return builtin_taxonomy(name_or_path);
  }
  const std::filesystem::path path(name_or_path);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kNotFound,
                "unknown taxonomy '" + std::string(name_or_path) +
                    "' (not a builtin name or a taxonomy file)");
  }
  return parse_taxonomy_json(read_file(path));
}

nlohmann::json to_json(const PhaseTaxonomy& taxonomy) {
  json phases = json::array();
  for (const auto& p : taxonomy.phases()) {
    phases.push_back({{"id", p.id},
                      {"name", p.name},
                      {"kind", p.kind == PhaseKind::kSurgical ? "surgical"
                                                              : "non_surgical"}});
  }
  return {{"surgery_kind", surgery_kind_name(taxonomy.surgery_kind())},
          {"phases", phases}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

nlohmann::json to_json(const ValidationReport& report) {
  json issues = json::array();
  for (const auto& i : report.issues) {
    issues.push_back({{"frame_index", i.frame_index},
                      {"code", issue_code_name(i.code)},
                      {"detail", i.detail}});
  }
  return {{"ok", report.ok}, {"issues", issues}};
}

namespace {

json label_json(const Label& l) { return l ? json(*l) : json("BLANK"); }

}  // namespace

nlohmann::json to_json(const std::vector<BlankSegment>& segments) {
  json out = json::array();
  for (const auto& s : segments) {
    json evidence = json::array();
    for (const auto& e : s.evidence) {
      json runs = json::array();
      for (const auto& r : e.runs) {
        runs.push_back({{"start_frame", r.start_frame},
                        {"end_frame", r.end_frame},
                        {"label", label_json(r.label)},
                        {"frames", r.length()}});
      }
      evidence.push_back({{"annotator_id", e.annotator_id}, {"runs", runs}});
    }
    out.push_back({{"start_frame", s.start_frame},
                   {"end_frame", s.end_frame},
                   {"evidence", evidence}});
  }
  return out;
}

nlohmann::json to_json(const AgreementStats& stats) {
  return {{"annotators", stats.annotators},
          {"pairwise", stats.pairwise},
          {"unanimity_coverage", stats.unanimity_coverage}};
}

nlohmann::json to_json(const BoundaryProfile& profile) {
  json bins = json::array();
  for (std::size_t d = 0; d < profile.bins.size(); ++d) {
    bins.push_back({{"distance", d},
                    {"frames_at_distance", profile.bins[d].frames_at_distance},
                    {"disagreeing_frames", profile.bins[d].disagreeing_frames}});
  }
  return {{"max_distance", profile.max_distance}, {"bins", bins}};
}

nlohmann::json to_json(const EvalReport& report) {
  json per_phase = json::array();
  for (std::size_t i = 0; i < report.phase_ids.size(); ++i) {
    per_phase.push_back({{"phase_id", report.phase_ids[i]},
                         {"ap", report.per_phase_ap[i]
                                    ? json(*report.per_phase_ap[i])
                                    : json(nullptr)},
                         {"support", report.support[i]}});
  }
  return {{"per_phase", per_phase},
          {"map", report.map_value},
          {"absent_phases", report.absent_phases},
          {"evaluated_frames", report.evaluated_frames},
          {"confusion", report.confusion}};
}

nlohmann::json to_json(const DeltaTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json aps = json::object();
    json deltas = json::object();
    json display = json::object();
    for (const auto& [a, ap] : r.ap_by_annotation) aps[a] = ap.to_double();
    for (const auto& [a, d] : r.deltas) {
      deltas[a] = d.to_double();
      display[a] = d.display(2, true);
    }
    rows.push_back({{"model", r.model},
                    {"split", r.split},
                    {"ap_by_annotation", aps},
                    {"consensus_ap", r.consensus_ap.to_double()},
                    {"deltas", deltas},
                    {"deltas_display", display}});
  }
  return {{"rows", rows}, {"mean_delta_by_model", mean_delta_by_model(table)}};
}

nlohmann::json to_json(const DeviationReport& report) {
  json out = json::object();
  for (const auto& [key, entry] : report.by_key) {
    out[key] = {{"total_ap", entry.total_ap}, {"deviations", entry.deviations}};
  }
  return out;
}

nlohmann::json to_json(const SplitPlan& plan) {
  json folds = json::array();
  for (const auto& f : plan.folds) {
    folds.push_back(
        {{"name", f.name}, {"train_ids", f.train_ids}, {"test_ids", f.test_ids}});
  }
  json imputed = json::array();
  for (const auto& i : plan.imputed) {
    imputed.push_back(
        {{"case_id", i.case_id}, {"covariate", i.covariate}, {"value", i.value}});
  }
  return {{"mode", split_mode_name(plan.mode)},
          {"covariates", plan.covariates},
          {"folds", folds},
          {"balance_score", plan.balance_score},
          {"initial_score", plan.initial_score},
          {"accepted_swaps", plan.accepted_swaps},
          {"imputed", imputed}};
}

nlohmann::json to_json(const DivergenceReport& report) {
  return {{"diff_count", report.diff_count},
          {"first_diff_frame", report.first_diff_frame
                                   ? json(*report.first_diff_frame)
                                   : json(nullptr)}};
}

}  // namespace phaseforge
