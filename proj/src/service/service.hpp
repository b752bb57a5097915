// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "service/job_store.hpp"

namespace httplib {
class Server;
}

namespace partcraft {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 = any free port
  int workers = 1;
  std::string backend_profile = "synthetic";  // profile for requests without one
  std::string store = "partcraft-jobs";
  std::string cors_origin = "*";
};

// Reads {host, port, workers, backend_profile, store, cors_origin}; unknown
// keys are rejected. Environment variables PARTCRAFT_PORT, PARTCRAFT_WORKERS,
// PARTCRAFT_BACKEND_PROFILE and PARTCRAFT_STORE override the file.
ServiceOptions parse_service_options(const std::string& json);
void apply_environment(ServiceOptions& options);

// Runs one job request ({document, config, kind, masks_job?}) and writes its
// artifacts into `artifact_dir`. `masks_dir` is needed for generate jobs.
std::vector<std::string> run_job(const std::string& request_json, const std::string& default_profile,
                                 const std::string& artifact_dir, const std::string& masks_dir);

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds, requeues unfinished jobs and starts the workers. A service starts
  // at most once.
  void start();
  int port() const { return port_; }
  // Blocks until stop() is called.
  void wait();
  void stop();

  JobStore& store() { return store_; }

 private:
  void install_routes();
  void worker_loop();
  void enqueue(const std::string& id);
  void execute(const std::string& id);

  ServiceOptions options_;
  JobStore store_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  std::thread listener_;
  std::vector<std::thread> workers_;
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable stopped_cv_;
  bool stopped_ = false;
  std::mutex lifecycle_mutex_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  bool started_ = false;
};

}  // namespace partcraft
