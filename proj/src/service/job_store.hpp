// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace partcraft {

enum class JobState { kQueued, kRunning, kDone, kFailed };
enum class JobKind { kLocalize, kGenerate, kLocalizeGenerate };

const char* job_state_name(JobState state);
const char* job_kind_name(JobKind kind);
std::optional<JobKind> parse_job_kind(const std::string& text);

struct JobRecord {
  std::string id;
  JobKind kind = JobKind::kLocalize;
  JobState state = JobState::kQueued;
  std::string error;
  std::vector<std::string> artifacts;
  std::int64_t sequence = 0;  // submission order
};

// One directory per job: request.json, state.json and artifacts/.
class JobStore {
 public:
  explicit JobStore(std::string root);

  const std::string& root() const { return root_; }

  std::string create(JobKind kind, const std::string& request_json);
  std::optional<JobRecord> get(const std::string& id) const;
  std::string request(const std::string& id) const;
  std::string artifact_dir(const std::string& id) const;
  // Resolved path of an artifact listed on a done job, or nullopt.
  std::optional<std::string> artifact_path(const std::string& id, const std::string& name) const;

  // queued -> running -> {done, failed}; anything else throws kState.
  void mark_running(const std::string& id);
  void mark_done(const std::string& id, std::vector<std::string> artifacts);
  void mark_failed(const std::string& id, const std::string& error);

  // Fails jobs left running by a previous process and returns the queued ones
  // in submission order.
  std::vector<std::string> recover();

 private:
  JobRecord load_locked(const std::string& id) const;
  void save_locked(const JobRecord& record) const;
  void transition(const std::string& id, JobState from, JobState to, const std::string& error,
                  std::vector<std::string>* artifacts);

  std::string root_;
  mutable std::mutex mutex_;
  std::int64_t next_sequence_ = 0;
  std::uint64_t id_counter_ = 0;
};

bool valid_job_id(const std::string& id);

}  // namespace partcraft
