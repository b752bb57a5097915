// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "service/job_store.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "core/error.hpp"
#include "core/png_io.hpp"

namespace partcraft {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* job_state_name(JobState state) {
  switch (state) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "unknown";
}

const char* job_kind_name(JobKind kind) {
  switch (kind) {
    case JobKind::kLocalize: return "localize";
    case JobKind::kGenerate: return "generate";
    case JobKind::kLocalizeGenerate: return "localize+generate";
  }
  return "unknown";
}

std::optional<JobKind> parse_job_kind(const std::string& text) {
  if (text == "localize") return JobKind::kLocalize;
  if (text == "generate") return JobKind::kGenerate;
  if (text == "localize+generate") return JobKind::kLocalizeGenerate;
  return std::nullopt;
}

namespace {

std::optional<JobState> parse_state(const std::string& s) {
  if (s == "queued") return JobState::kQueued;
  if (s == "running") return JobState::kRunning;
  if (s == "done") return JobState::kDone;
  if (s == "failed") return JobState::kFailed;
  return std::nullopt;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  write_file_bytes(tmp.string(), content);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path.string());
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

bool valid_job_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || c == '-';
         });
}

JobStore::JobStore(std::string root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create job store " + root_ + ": " + ec.message());
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "state.json")) continue;
    try {
      const json j = json::parse(read_text(entry.path() / "state.json"));
      next_sequence_ = std::max(next_sequence_, j.value("sequence", std::int64_t{0}) + 1);
    } catch (const std::exception&) {
    }
  }
}

std::string JobStore::create(JobKind kind, const std::string& request_json) {
  std::lock_guard lock(mutex_);
  static thread_local std::mt19937_64 rng(std::random_device{}() ^
                                          static_cast<std::uint64_t>(
                                              std::chrono::steady_clock::now().time_since_epoch().count()));
  std::string id;
  do {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx-%llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(id_counter_++));
    id = buf;
  } while (fs::exists(fs::path(root_) / id));
  const fs::path dir = fs::path(root_) / id;
  fs::create_directories(dir / "artifacts");
  write_atomic(dir / "request.json", request_json);
  JobRecord r;
  r.id = id;
  r.kind = kind;
  r.sequence = next_sequence_++;
  save_locked(r);
  return id;
}

JobRecord JobStore::load_locked(const std::string& id) const {
  if (!valid_job_id(id)) throw Error(ErrorCode::kNotFound, "unknown job '" + id + "'");
  const fs::path file = fs::path(root_) / id / "state.json";
  if (!fs::exists(file)) throw Error(ErrorCode::kNotFound, "unknown job '" + id + "'");
  const json j = json::parse(read_text(file));
  JobRecord r;
  r.id = id;
  const auto kind = parse_job_kind(j.at("kind").get<std::string>());
  const auto state = parse_state(j.at("state").get<std::string>());
  if (!kind || !state) throw Error(ErrorCode::kInternal, "corrupt state for job " + id);
  r.kind = *kind;
  r.state = *state;
  r.error = j.value("error", std::string());
  r.artifacts = j.value("artifacts", std::vector<std::string>{});
  r.sequence = j.value("sequence", std::int64_t{0});
  return r;
}

void JobStore::save_locked(const JobRecord& r) const {
  json j = {{"kind", job_kind_name(r.kind)},
            {"state", job_state_name(r.state)},
            {"artifacts", r.artifacts},
            {"sequence", r.sequence}};
  if (!r.error.empty()) j["error"] = r.error;
  write_atomic(fs::path(root_) / r.id / "state.json", j.dump(2));
}

std::optional<JobRecord> JobStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  try {
    return load_locked(id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) return std::nullopt;
    throw;
  }
}

std::string JobStore::request(const std::string& id) const {
  std::lock_guard lock(mutex_);
  load_locked(id);
  return read_text(fs::path(root_) / id / "request.json");
}

std::string JobStore::artifact_dir(const std::string& id) const {
  if (!valid_job_id(id)) throw Error(ErrorCode::kNotFound, "unknown job '" + id + "'");
  return (fs::path(root_) / id / "artifacts").string();
}

std::optional<std::string> JobStore::artifact_path(const std::string& id, const std::string& name) const {
  const auto r = get(id);
  if (!r || r->state != JobState::kDone) return std::nullopt;
  if (std::find(r->artifacts.begin(), r->artifacts.end(), name) == r->artifacts.end()) return std::nullopt;
  return (fs::path(artifact_dir(id)) / name).string();
}

void JobStore::transition(const std::string& id, JobState from, JobState to, const std::string& error,
                          std::vector<std::string>* artifacts) {
  std::lock_guard lock(mutex_);
  JobRecord r = load_locked(id);
  if (r.state != from) {
    throw Error(ErrorCode::kState, std::string("job ") + id + " is " + job_state_name(r.state) + ", expected " +
                                       job_state_name(from));
  }
  r.state = to;
  r.error = error;
  if (artifacts != nullptr) r.artifacts = std::move(*artifacts);
  save_locked(r);
}

void JobStore::mark_running(const std::string& id) { transition(id, JobState::kQueued, JobState::kRunning, "", nullptr); }

void JobStore::mark_done(const std::string& id, std::vector<std::string> artifacts) {
  transition(id, JobState::kRunning, JobState::kDone, "", &artifacts);
}

void JobStore::mark_failed(const std::string& id, const std::string& error) {
  transition(id, JobState::kRunning, JobState::kFailed, error.empty() ? "failed" : error, nullptr);
}

std::vector<std::string> JobStore::recover() {
  std::lock_guard lock(mutex_);
  std::vector<JobRecord> queued;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const std::string id = entry.path().filename().string();
    if (!entry.is_directory() || !valid_job_id(id)) continue;
    JobRecord r;
    try {
      r = load_locked(id);
    } catch (const std::exception&) {
      continue;
    }
    if (r.state == JobState::kRunning) {
      r.state = JobState::kFailed;
      r.error = "interrupted: service restarted while the job was running";
      save_locked(r);
    } else if (r.state == JobState::kQueued) {
      queued.push_back(r);
    }
  }
  std::sort(queued.begin(), queued.end(), [](const JobRecord& a, const JobRecord& b) { return a.sequence < b.sequence; });
  std::vector<std::string> ids;
  for (const auto& r : queued) ids.push_back(r.id);
  return ids;
}

}  // namespace partcraft
