// Copyright 2026 The qpress Authors. All Rights Reserved.
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

// Job service: image store, search jobs with live progress, HTTP front end.

#ifndef QPRESS_SERVICE_HPP_
#define QPRESS_SERVICE_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qpress/report.hpp"

namespace qpress {

// Thrown when an artifact is requested from a job that has none (yet).
class NotReady : public Error {
 public:
  using Error::Error;
};
// Unknown job or image id.
class NotFound : public Error {
 public:
  using Error::Error;
};

// Hex SHA-256.
std::string Sha256Hex(std::span<const std::uint8_t> bytes);

// Content-addressed images: id = SHA-256 of the canonical PGM encoding.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root);

  // Idempotent; returns the image id.
  std::string Put(const RasterImage& image);
  bool Has(std::string_view id) const;
  // Throws NotFound for unknown ids.
  RasterImage Get(std::string_view id) const;
  Bytes GetPgm(std::string_view id) const;

 private:
  std::filesystem::path PathFor(std::string_view id) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

// Absolute difference image scaled to 8 bits: 255 / max_diff, or flat
// gray (128) when the images are identical.
struct DiffMap {
  RasterImage display;
  std::uint32_t max_diff = 0;
};
DiffMap MakeDiffMap(const RasterImage& a, const RasterImage& b);

enum class JobState { kQueued, kRunning, kDone, kFailed };
std::string_view JobStateName(JobState s);

struct JobSpec {
  std::string image_id;
  std::string codec_id;
  std::string metric_id;
  double target = 0.0;
  std::optional<double> tolerance;  // metric default when absent
  std::optional<double> param_min;  // codec default when absent
  std::optional<double> param_max;
  SearchMethod method = SearchMethod::kInterpolate;
  bool clamp = false;
};
nlohmann::json JobSpecToJson(const JobSpec& spec);
// Throws InvalidArgument on missing or mistyped fields.
JobSpec JobSpecFromJson(const nlohmann::json& json);

struct JobSnapshot {
  std::string job_id;
  JobSpec spec;
  JobState state = JobState::kQueued;
  std::vector<Probe> history;
  std::vector<Probe> endpoint_probes;
  std::optional<SearchReport> report;  // done, or failed as infeasible
  std::optional<std::string> error;
  std::optional<std::uint32_t> max_diff;
};
nlohmann::json JobSnapshotToJson(const JobSnapshot& job);

enum class Artifact { kOriginal, kDecoded, kDiff, kReport, kBlob };
std::optional<Artifact> ParseArtifact(std::string_view name);

// Runs search jobs on a worker pool. State changes are appended to
// <root>/jobs.log; finished artifacts live in <root>/jobs/<id>/.
class JobManager {
 public:
  JobManager(std::filesystem::path root, ImageStore& images,
             CodecRegistry codecs, const MetricRegistry& metrics, int workers);
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  // Validates the job (image, codec, metric, target, range) and queues it.
  std::string Submit(const JobSpec& spec);
  // Throws NotFound.
  JobSnapshot Poll(std::string_view job_id) const;
  // Throws NotFound or NotReady.
  Bytes Fetch(std::string_view job_id, Artifact which) const;
  // Blocks until the job is done or failed, or the timeout passes.
  bool Wait(std::string_view job_id, std::chrono::milliseconds timeout) const;

  const CodecRegistry& codecs() const { return codecs_; }
  const MetricRegistry& metrics() const { return metrics_; }
  // Effective range and tolerance for a spec.
  ParameterRange RangeFor(const JobSpec& spec, const RasterImage& image) const;
  double ToleranceFor(const JobSpec& spec) const;

 private:
  struct Job;

  void Work();
  void Execute(Job& job);
  void Log(const nlohmann::json& event);
  void Recover();
  std::filesystem::path JobDir(std::string_view id) const;

  std::filesystem::path root_;
  ImageStore& images_;
  CodecRegistry codecs_;
  const MetricRegistry& metrics_;

  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::condition_variable queue_cv_;
  std::map<std::string, std::shared_ptr<Job>, std::less<>> jobs_;
  std::deque<std::shared_ptr<Job>> queue_;
  std::uint64_t next_id_ = 1;
  bool stopping_ = false;
  std::mutex log_mu_;
  std::vector<std::thread> workers_;
};

struct ServiceConfig {
  std::filesystem::path data_dir;
  int workers = 2;
};

// HTTP front end:
//   POST /api/images                   body: PGM          -> {"image_id"}
//   POST /api/images/raw?width=&height=&bands=&bit_depth=&byte_order=
//                                      body: raw samples  -> {"image_ids"}
//   GET  /api/images/{id}                                  -> PGM
//   POST /api/jobs                     body: job spec     -> {"job_id"}
//   GET  /api/jobs/{id}                                    -> job snapshot
//   GET  /api/jobs/{id}/artifacts/{original|decoded|diff|report|blob}
//   POST /api/estimate                 body: {image_id, codec_id, metric_id,
//                                             param_min?, param_max?}
//   GET  /api/codecs
//   GET  /api/metrics
class Service {
 public:
  Service(ServiceConfig config, CodecRegistry codecs,
          const MetricRegistry& metrics = BuiltinMetrics());
  ~Service();

  ImageStore& images() { return *images_; }
  JobManager& jobs() { return *jobs_; }

  // Returns the bound port; 0 binds an ephemeral one.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool Listen();
  void Stop();

 private:
  class Http;
  std::unique_ptr<ImageStore> images_;
  std::unique_ptr<JobManager> jobs_;
  std::unique_ptr<Http> http_;
};

}  // namespace qpress

#endif  // QPRESS_SERVICE_HPP_
