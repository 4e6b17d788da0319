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

#include "phaseforge/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "phaseforge/error.hpp"

namespace fs = std::filesystem;

namespace phaseforge {
namespace {

std::string version_name(std::uint64_t version, std::string_view extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%06llu.",
                static_cast<unsigned long long>(version));
  return buf + std::string(extension);
}

std::optional<std::uint64_t> parse_version_name(const std::string& name,
                                                std::string_view extension) {
  const std::string suffix = "." + std::string(extension);
  if (name.size() <= 1 + suffix.size() || name[0] != 'v' ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return std::nullopt;
  }
  const std::string digits = name.substr(1, name.size() - 1 - suffix.size());
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoull(digits);
}

void check_name(std::string_view name, const char* what) {
  if (!valid_store_name(name)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " '" + std::string(name) +
                    "' must match [A-Za-z0-9._-]+");
  }
}

// Writes and fsyncs `bytes` to a unique temp file inside `dir`.
fs::path write_temp(const fs::path& dir, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path tmp =
      dir / (".tmp-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + tmp.string() + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::kIoError, "cannot flush " + tmp.string());
  }
  return tmp;
}

}  // namespace

fs::path default_store_root() {
  if (const char* home = std::getenv("PHASEFORGE_HOME"); home && *home) {
    return home;
  }
  if (const char* home = std::getenv("HOME"); home && *home) {
    return fs::path(home) / ".phaseforge";
  }
  return ".phaseforge";
}

bool valid_store_name(std::string_view name) {
  if (name.empty() || name == "." || name == ".." || name.size() > 128) {
    return false;
  }
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
  });
}

ProjectStore::ProjectStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "projects", ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create store at " + root_.string() + ": " + ec.message());
  }
}

std::uint64_t ProjectStore::write_version(const fs::path& dir,
                                          std::string_view extension,
                                          std::string_view bytes) {
  const fs::path abs = root_ / dir;
  std::error_code ec;
  fs::create_directories(abs, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + abs.string());
  const fs::path tmp = write_temp(abs, bytes);
  auto existing = versions(dir, extension);
  std::uint64_t next = existing.empty() ? 1 : existing.back() + 1;
  // link() refuses to replace an existing file, so a version is never
  // clobbered even if two writers race.
  while (::link(tmp.c_str(), (abs / version_name(next, extension)).c_str()) != 0) {
    if (errno != EEXIST) {
      ::unlink(tmp.c_str());
      throw Error(ErrorCode::kIoError,
                  "cannot publish version in " + abs.string() + ": " +
                      std::strerror(errno));
    }
    ++next;
  }
  ::unlink(tmp.c_str());
  return next;
}

std::vector<std::uint64_t> ProjectStore::versions(
    const fs::path& dir, std::string_view extension) const {
  std::vector<std::uint64_t> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / dir, ec)) {
    if (auto v = parse_version_name(entry.path().filename().string(), extension)) {
      out.push_back(*v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::string> ProjectStore::read_version(
    const fs::path& dir, std::string_view extension,
    std::uint64_t version) const {
  const fs::path p = root_ / dir / version_name(version, extension);
  if (!fs::exists(p)) return std::nullopt;
  return read_file(p);
}

std::optional<std::string> ProjectStore::read_latest(
    const fs::path& dir, std::string_view extension) const {
  auto v = versions(dir, extension);
  if (v.empty()) return std::nullopt;
  return read_version(dir, extension, v.back());
}

fs::path ProjectStore::project_dir(std::string_view project) const {
  check_name(project, "project id");
  return fs::path("projects") / std::string(project);
}

fs::path ProjectStore::case_dir(std::string_view project,
                                std::string_view case_id) const {
  check_name(case_id, "case id");
  return project_dir(project) / "cases" / std::string(case_id);
}

bool ProjectStore::project_exists(std::string_view project) const {
  return !versions(project_dir(project) / "project", "json").empty();
}

namespace {

std::vector<std::string> subdirectories(const fs::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory() && valid_store_name(entry.path().filename().string())) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> ProjectStore::projects() const {
  return subdirectories(root_ / "projects");
}

std::vector<std::string> ProjectStore::cases(std::string_view project) const {
  return subdirectories(root_ / project_dir(project) / "cases");
}

std::uint64_t ProjectStore::put_project(std::string_view project,
                                        const PhaseTaxonomy& taxonomy) {
  const nlohmann::json j = {{"project_id", project},
                            {"taxonomy", to_json(taxonomy)}};
  return write_version(project_dir(project) / "project", "json", j.dump(2) + "\n");
}

std::optional<PhaseTaxonomy> ProjectStore::project_taxonomy(
    std::string_view project) const {
  auto bytes = read_latest(project_dir(project) / "project", "json");
  if (!bytes) return std::nullopt;
  const auto j = nlohmann::json::parse(*bytes);
  return parse_taxonomy_json(j.at("taxonomy").dump());
}

std::uint64_t ProjectStore::put_manifest(std::string_view project,
                                         const CaseManifest& manifest) {
  return write_version(case_dir(project, manifest.case_id) / "manifest", "json",
                       write_manifest_json(manifest));
}

std::optional<CaseManifest> ProjectStore::manifest(
    std::string_view project, std::string_view case_id) const {
  auto bytes = read_latest(case_dir(project, case_id) / "manifest", "json");
  if (!bytes) return std::nullopt;
  return parse_manifest_json(*bytes);
}

std::uint64_t ProjectStore::put_track(std::string_view project,
                                      const FrameTrack& track) {
  check_name(track.annotator_id, "annotator id");
  return write_version(
      case_dir(project, track.case_id) / "tracks" / track.annotator_id, "csv",
      write_track_csv(track));
}

std::optional<FrameTrack> ProjectStore::track(std::string_view project,
                                              std::string_view case_id,
                                              std::string_view annotator) const {
  check_name(annotator, "annotator id");
  auto bytes = read_latest(
      case_dir(project, case_id) / "tracks" / std::string(annotator), "csv");
  if (!bytes) return std::nullopt;
  return parse_track_csv(*bytes, std::string(case_id), std::string(annotator));
}

std::optional<FrameTrack> ProjectStore::track(std::string_view project,
                                              std::string_view case_id,
                                              std::string_view annotator,
                                              std::uint64_t version) const {
  check_name(annotator, "annotator id");
  auto bytes = read_version(
      case_dir(project, case_id) / "tracks" / std::string(annotator), "csv",
      version);
  if (!bytes) return std::nullopt;
  return parse_track_csv(*bytes, std::string(case_id), std::string(annotator));
}

std::uint64_t ProjectStore::track_version(std::string_view project,
                                          std::string_view case_id,
                                          std::string_view annotator) const {
  check_name(annotator, "annotator id");
  auto v = versions(case_dir(project, case_id) / "tracks" / std::string(annotator),
                    "csv");
  return v.empty() ? 0 : v.back();
}

std::vector<std::string> ProjectStore::annotators(
    std::string_view project, std::string_view case_id) const {
  std::vector<std::string> out;
  for (auto& name : subdirectories(root_ / case_dir(project, case_id) / "tracks")) {
    if (!versions(case_dir(project, case_id) / "tracks" / name, "csv").empty()) {
      out.push_back(std::move(name));
    }
  }
  return out;
}

std::uint64_t ProjectStore::put_draft(
    std::string_view project, const FrameTrack& merged,
    const std::map<std::string, std::uint64_t>& sources) {
  const fs::path dir = case_dir(project, merged.case_id) / "draft";
  const std::uint64_t version =
      write_version(dir, "csv", write_track_csv(merged));
  const fs::path tmp = write_temp(root_ / dir, nlohmann::json(sources).dump());
  const fs::path target = root_ / dir / version_name(version, "sources.json");
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::kIoError, "cannot publish " + target.string());
  }
  return version;
}

std::map<std::string, std::uint64_t> ProjectStore::draft_sources(
    std::string_view project, std::string_view case_id,
    std::uint64_t draft_version) const {
  auto bytes = read_version(case_dir(project, case_id) / "draft", "sources.json",
                            draft_version);
  if (!bytes) return {};
  return nlohmann::json::parse(*bytes).get<std::map<std::string, std::uint64_t>>();
}

std::optional<FrameTrack> ProjectStore::draft(std::string_view project,
                                              std::string_view case_id) const {
  auto bytes = read_latest(case_dir(project, case_id) / "draft", "csv");
  if (!bytes) return std::nullopt;
  FrameTrack t = parse_track_csv(*bytes, std::string(case_id), "consensus");
  t.provenance = TrackProvenance::kDraft;
  return t;
}

std::uint64_t ProjectStore::draft_version(std::string_view project,
                                          std::string_view case_id) const {
  auto v = versions(case_dir(project, case_id) / "draft", "csv");
  return v.empty() ? 0 : v.back();
}

std::uint64_t ProjectStore::append_resolution_event(
    std::string_view project, std::string_view case_id,
    std::uint64_t draft_version, std::string_view event_json) {
  return write_version(case_dir(project, case_id) / "resolutions" /
                           ("draft-" + std::to_string(draft_version)),
                       "json", event_json);
}

std::vector<std::string> ProjectStore::resolution_events(
    std::string_view project, std::string_view case_id,
    std::uint64_t draft_version) const {
  const fs::path dir = case_dir(project, case_id) / "resolutions" /
                       ("draft-" + std::to_string(draft_version));
  std::vector<std::string> out;
  for (std::uint64_t v : versions(dir, "json")) {
    out.push_back(*read_version(dir, "json", v));
  }
  return out;
}

std::uint64_t ProjectStore::put_report(std::string_view project,
                                       std::string_view case_id,
                                       std::string_view name,
                                       std::string_view json) {
  check_name(name, "report name");
  return write_version(case_dir(project, case_id) / "reports" / std::string(name),
                       "json", json);
}

}  // namespace phaseforge
