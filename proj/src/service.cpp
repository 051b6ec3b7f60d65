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

#include "qpress/service.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "httplib.h"

namespace qpress {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool IsHexId(std::string_view id) {
  return id.size() == 64 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string ToText(const Bytes& b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

json ProbeList(const std::vector<Probe>& probes) {
  json a = json::array();
  for (const Probe& p : probes) a.push_back({{"param", p.param}, {"value", p.value}});
  return a;
}

double DefaultTolerance(const MetricDescriptor& m) {
  return m.units == MetricUnits::kDecibels ? kDefaultDecibelTolerance
                                           : kDefaultUnitlessTolerance;
}

}  // namespace

std::string Sha256Hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

// ---------------------------------------------------------------- ImageStore

ImageStore::ImageStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path ImageStore::PathFor(std::string_view id) const {
  if (!IsHexId(id)) throw NotFound("unknown image id '" + std::string(id) + "'");
  return root_ / (std::string(id) + ".pgm");
}

std::string ImageStore::Put(const RasterImage& image) {
  const Bytes pgm = StorePgm(image);
  const std::string id = Sha256Hex(pgm);
  const fs::path path = root_ / (id + ".pgm");
  std::lock_guard<std::mutex> lock(mu_);
  if (!fs::exists(path)) WriteFileAtomic(path, pgm);
  return id;
}

bool ImageStore::Has(std::string_view id) const {
  return IsHexId(id) && fs::exists(root_ / (std::string(id) + ".pgm"));
}

Bytes ImageStore::GetPgm(std::string_view id) const {
  const fs::path path = PathFor(id);
  if (!fs::exists(path)) throw NotFound("unknown image id '" + std::string(id) + "'");
  return ReadFile(path);
}

RasterImage ImageStore::Get(std::string_view id) const { return LoadPgm(GetPgm(id)); }

// ------------------------------------------------------------------- DiffMap

DiffMap MakeDiffMap(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidArgument("diff of differently sized images");
  }
  const auto sa = a.samples();
  const auto sb = b.samples();
  std::vector<std::uint32_t> d(sa.size());
  DiffMap out;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    d[i] = static_cast<std::uint32_t>(std::abs(int(sa[i]) - int(sb[i])));
    out.max_diff = std::max(out.max_diff, d[i]);
  }
  std::vector<std::uint16_t> px(sa.size(), 128);
  if (out.max_diff > 0) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      px[i] = static_cast<std::uint16_t>(
          std::lround(255.0 * double(d[i]) / double(out.max_diff)));
    }
  }
  out.display = RasterImage(a.width(), a.height(), 8, std::move(px));
  return out;
}

// ------------------------------------------------------------------ JSON glue

std::string_view JobStateName(JobState s) {
  switch (s) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "?";
}

json JobSpecToJson(const JobSpec& s) {
  json j = {{"image_id", s.image_id},   {"codec_id", s.codec_id},
            {"metric_id", s.metric_id}, {"target", s.target},
            {"method", SearchMethodName(s.method)}, {"clamp", s.clamp}};
  j["tolerance"] = s.tolerance ? json(*s.tolerance) : json(nullptr);
  j["param_min"] = s.param_min ? json(*s.param_min) : json(nullptr);
  j["param_max"] = s.param_max ? json(*s.param_max) : json(nullptr);
  return j;
}

JobSpec JobSpecFromJson(const json& j) {
  try {
    if (!j.is_object()) throw InvalidArgument("job spec must be a JSON object");
    JobSpec s;
    s.image_id = j.at("image_id").get<std::string>();
    s.codec_id = j.at("codec_id").get<std::string>();
    s.metric_id = j.at("metric_id").get<std::string>();
    s.target = j.at("target").get<double>();
    auto opt = [&](const char* k) -> std::optional<double> {
      if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
      return j.at(k).get<double>();
    };
    s.tolerance = opt("tolerance");
    s.param_min = opt("param_min");
    s.param_max = opt("param_max");
    if (j.contains("method")) s.method = ParseSearchMethod(j.at("method").get<std::string>());
    if (j.contains("clamp")) s.clamp = j.at("clamp").get<bool>();
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad job spec: ") + e.what());
  }
}

json JobSnapshotToJson(const JobSnapshot& job) {
  json j;
  j["job_id"] = job.job_id;
  j["spec"] = JobSpecToJson(job.spec);
  j["state"] = JobStateName(job.state);
  j["history"] = ProbeList(job.history);
  j["endpoint_probes"] = ProbeList(job.endpoint_probes);
  j["report"] = job.report ? ReportToJson(*job.report) : json(nullptr);
  j["error"] = job.error ? json(*job.error) : json(nullptr);
  j["max_diff"] = job.max_diff ? json(*job.max_diff) : json(nullptr);
  return j;
}

std::optional<Artifact> ParseArtifact(std::string_view name) {
  if (name == "original") return Artifact::kOriginal;
  if (name == "decoded") return Artifact::kDecoded;
  if (name == "diff") return Artifact::kDiff;
  if (name == "report") return Artifact::kReport;
  if (name == "blob") return Artifact::kBlob;
  return std::nullopt;
}

// ---------------------------------------------------------------- JobManager

struct JobManager::Job {
  std::string id;
  JobSpec spec;
  JobState state = JobState::kQueued;
  std::vector<Probe> history;
  std::vector<Probe> endpoints;
  std::optional<SearchReport> report;
  std::optional<std::string> error;
  std::optional<std::uint32_t> max_diff;
};

JobManager::JobManager(fs::path root, ImageStore& images, CodecRegistry codecs,
                       const MetricRegistry& metrics, int workers)
    : root_(std::move(root)),
      images_(images),
      codecs_(std::move(codecs)),
      metrics_(metrics) {
  fs::create_directories(root_ / "jobs");
  Recover();
  const int n = std::max(1, workers);
  for (int i = 0; i < n; ++i) workers_.emplace_back([this] { Work(); });
}

JobManager::~JobManager() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (std::thread& t : workers_) t.join();
}

fs::path JobManager::JobDir(std::string_view id) const {
  return root_ / "jobs" / std::string(id);
}

void JobManager::Log(const json& event) {
  std::lock_guard<std::mutex> lock(log_mu_);
  std::ofstream out(root_ / "jobs.log", std::ios::app | std::ios::binary);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw IoError("cannot append to the job log");
}

void JobManager::Recover() {
  std::ifstream in(root_ / "jobs.log", std::ios::binary);
  if (!in) return;
  std::string line;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    json e;
    try {
      e = json::parse(line);
    } catch (const json::exception&) {
      continue;  // torn final line after a crash
    }
    const std::string id = e.value("job_id", "");
    const std::string ev = e.value("event", "");
    if (id.empty()) continue;
    if (ev == "submitted") {
      auto job = std::make_shared<Job>();
      job->id = id;
      try {
        job->spec = JobSpecFromJson(e.at("spec"));
      } catch (const std::exception&) {
        continue;
      }
      jobs_[id] = job;
      order.push_back(id);
      std::uint64_t n = 0;
      if (std::sscanf(id.c_str(), "job-%llu", reinterpret_cast<unsigned long long*>(&n)) == 1) {
        next_id_ = std::max(next_id_, n + 1);
      }
      continue;
    }
    auto it = jobs_.find(id);
    if (it == jobs_.end()) continue;
    Job& job = *it->second;
    if (ev == "running") {
      job.state = JobState::kRunning;
    } else if (ev == "done" || ev == "failed") {
      job.state = ev == "done" ? JobState::kDone : JobState::kFailed;
      if (e.contains("error") && !e["error"].is_null()) job.error = e["error"];
      if (e.contains("max_diff") && !e["max_diff"].is_null()) job.max_diff = e["max_diff"];
      const fs::path report = JobDir(id) / "report.json";
      if (fs::exists(report)) {
        try {
          job.report = ParseReport(ToText(ReadFile(report)));
          job.history = job.report->history;
          job.endpoints = job.report->endpoint_probes;
        } catch (const Error&) {
        }
      }
    }
  }
  // Jobs cut off by a restart are not resumed.
  for (const std::string& id : order) {
    Job& job = *jobs_[id];
    if (job.state == JobState::kQueued || job.state == JobState::kRunning) {
      job.state = JobState::kFailed;
      job.error = "interrupted by service restart";
      Log({{"event", "failed"}, {"job_id", id}, {"error", *job.error}});
    }
  }
}

ParameterRange JobManager::RangeFor(const JobSpec& spec, const RasterImage& image) const {
  const CodecPtr codec = codecs_.Get(spec.codec_id);
  ParameterRange r = codec->DefaultRange(image.bit_depth());
  if (spec.param_min) r.min = *spec.param_min;
  if (spec.param_max) r.max = *spec.param_max;
  r.Validate();
  return r;
}

double JobManager::ToleranceFor(const JobSpec& spec) const {
  return spec.tolerance.value_or(DefaultTolerance(metrics_.Contains(spec.metric_id)
                                                      ? metrics_.Get(spec.metric_id).descriptor
                                                      : MetricDescriptor{}));
}

std::string JobManager::Submit(const JobSpec& spec) {
  if (!images_.Has(spec.image_id)) {
    throw NotFound("unknown image id '" + spec.image_id + "'");
  }
  const RasterImage image = images_.Get(spec.image_id);
  const CodecPtr codec = codecs_.Get(spec.codec_id);
  const Metric metric = ResolveMetric(*codec, metrics_, spec.metric_id);
  QualityTarget target{spec.metric_id, spec.target, ToleranceFor(spec)};
  target.Validate(metric.descriptor);
  RangeFor(spec, image);

  auto job = std::make_shared<Job>();
  job->spec = spec;
  {
    std::lock_guard<std::mutex> lock(mu_);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "job-%06llu",
                  static_cast<unsigned long long>(next_id_++));
    job->id = buf;
    jobs_[job->id] = job;
  }
  Log({{"event", "submitted"}, {"job_id", job->id}, {"spec", JobSpecToJson(spec)}});
  {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back(job);
  }
  queue_cv_.notify_one();
  return job->id;
}

void JobManager::Work() {
  for (;;) {
    std::shared_ptr<Job> job;
    {
      std::unique_lock<std::mutex> lock(mu_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = queue_.front();
      queue_.pop_front();
      job->state = JobState::kRunning;
    }
    changed_.notify_all();
    Execute(*job);
    changed_.notify_all();
  }
}

void JobManager::Execute(Job& job) {
  const JobSpec spec = job.spec;
  try {
    Log({{"event", "running"}, {"job_id", job.id}});
    const RasterImage image = images_.Get(spec.image_id);
    const CodecPtr codec = codecs_.Get(spec.codec_id);
    const Metric metric = ResolveMetric(*codec, metrics_, spec.metric_id);
    const QualityTarget target{spec.metric_id, spec.target, ToleranceFor(spec)};
    const ParameterRange range = RangeFor(spec, image);

    SearchOptions opts;
    opts.clamp = spec.clamp;
    opts.on_probe = [this, &job](const Probe& p, bool endpoint) {
      {
        std::lock_guard<std::mutex> lock(mu_);
        (endpoint ? job.endpoints : job.history).push_back(p);
      }
      changed_.notify_all();
    };
    ReportedRun run = RunWithReport(spec.method, image, *codec, metric, target,
                                    range, opts);
    const fs::path dir = JobDir(job.id);
    fs::create_directories(dir);
    WriteFileAtomic(dir / "report.json", SerializeReport(run.report));
    if (!run.result) {
      std::lock_guard<std::mutex> lock(mu_);
      job.report = run.report;
      job.error = run.report.error;
      job.state = JobState::kFailed;
    } else {
      const RasterImage decoded = codec->Decompress(run.result->blob);
      const DiffMap diff = MakeDiffMap(image, decoded);
      WriteFileAtomic(dir / "blob.qpcb", SerializeBlob(run.result->blob));
      WriteFileAtomic(dir / "decoded.pgm", StorePgm(decoded));
      WriteFileAtomic(dir / "diff.pgm", StorePgm(diff.display));
      std::lock_guard<std::mutex> lock(mu_);
      job.report = run.report;
      job.max_diff = diff.max_diff;
      job.history = run.report.history;
      job.endpoints = run.report.endpoint_probes;
      job.state = JobState::kDone;
    }
  } catch (const std::exception& e) {
    std::lock_guard<std::mutex> lock(mu_);
    job.error = e.what();
    job.state = JobState::kFailed;
  }
  json event = {{"event", JobStateName(job.state)}, {"job_id", job.id}};
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (job.error) event["error"] = *job.error;
    if (job.max_diff) event["max_diff"] = *job.max_diff;
  }
  try {
    Log(event);
  } catch (const Error&) {
  }
}

JobSnapshot JobManager::Poll(std::string_view job_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw NotFound("unknown job id '" + std::string(job_id) + "'");
  const Job& j = *it->second;
  return {j.id, j.spec, j.state, j.history, j.endpoints, j.report, j.error, j.max_diff};
}

bool JobManager::Wait(std::string_view job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw NotFound("unknown job id '" + std::string(job_id) + "'");
  const std::shared_ptr<Job> job = it->second;
  return changed_.wait_for(lock, timeout, [&] {
    return job->state == JobState::kDone || job->state == JobState::kFailed;
  });
}

Bytes JobManager::Fetch(std::string_view job_id, Artifact which) const {
  const JobSnapshot snap = Poll(job_id);
  if (which == Artifact::kOriginal) return images_.GetPgm(snap.spec.image_id);
  const fs::path dir = JobDir(job_id);
  if (which == Artifact::kReport) {
    if (!snap.report) throw NotReady("job " + snap.job_id + " has no report yet");
    return ReadFile(dir / "report.json");
  }
  if (snap.state != JobState::kDone) {
    throw NotReady("job " + snap.job_id + " is " +
                   std::string(JobStateName(snap.state)));
  }
  switch (which) {
    case Artifact::kDecoded: return ReadFile(dir / "decoded.pgm");
    case Artifact::kDiff: return ReadFile(dir / "diff.pgm");
    case Artifact::kBlob: return ReadFile(dir / "blob.qpcb");
    default: break;
  }
  throw InvalidArgument("unknown artifact");
}

// ------------------------------------------------------------------- Service

class Service::Http {
 public:
  explicit Http(Service& svc) : svc_(svc) { Routes(); }

  httplib::Server server;

 private:
  static void SendJson(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }
  static void SendError(httplib::Response& res, int status, const std::string& msg) {
    SendJson(res, {{"error", msg}}, status);
  }
  static void SendBytes(httplib::Response& res, const Bytes& b, const char* type) {
    res.set_content(std::string(reinterpret_cast<const char*>(b.data()), b.size()), type);
  }

  // Maps library exceptions to HTTP statuses.
  template <typename F>
  static httplib::Server::Handler Guard(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const NotFound& e) {
        SendError(res, 404, e.what());
      } catch (const NotReady& e) {
        SendError(res, 409, e.what());
      } catch (const InvalidArgument& e) {
        SendError(res, 400, e.what());
      } catch (const FormatError& e) {
        SendError(res, 400, e.what());
      } catch (const json::exception& e) {
        SendError(res, 400, std::string("bad JSON: ") + e.what());
      } catch (const std::exception& e) {
        SendError(res, 500, e.what());
      }
    };
  }

  static json ParseBody(const httplib::Request& req) {
    try {
      return json::parse(req.body);
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("bad JSON body: ") + e.what());
    }
  }

  void Routes() {
    server.set_payload_max_length(std::size_t{1} << 30);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.status = 204;
    });

    server.Post("/api/images", Guard([this](const httplib::Request& req,
                                            httplib::Response& res) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(req.body.data());
      const RasterImage img = LoadPgm({p, req.body.size()});
      SendJson(res, {{"image_id", svc_.images().Put(img)},
                     {"width", img.width()},
                     {"height", img.height()},
                     {"bit_depth", img.bit_depth()}});
    }));

    server.Post("/api/images/raw", Guard([this](const httplib::Request& req,
                                                httplib::Response& res) {
      std::string sidecar;
      for (const char* key : {"width", "height", "bands", "bit_depth", "byte_order"}) {
        if (req.has_param(key)) sidecar += std::string(key) + ": " + req.get_param_value(key) + "\n";
      }
      const RawDescriptor d = ParseRawDescriptor(sidecar);
      const auto* p = reinterpret_cast<const std::uint8_t*>(req.body.data());
      const SpectralCube cube = LoadRaw({p, req.body.size()}, d);
      json ids = json::array();
      for (const RasterImage& band : cube.bands()) ids.push_back(svc_.images().Put(band));
      SendJson(res, {{"image_ids", ids},
                     {"width", d.width},
                     {"height", d.height},
                     {"bit_depth", d.bit_depth}});
    }));

    server.Get(R"(/api/images/([0-9a-f]+))", Guard([this](const httplib::Request& req,
                                                          httplib::Response& res) {
      SendBytes(res, svc_.images().GetPgm(req.matches[1].str()),
                "image/x-portable-graymap");
    }));

    server.Post("/api/jobs", Guard([this](const httplib::Request& req,
                                          httplib::Response& res) {
      const std::string id = svc_.jobs().Submit(JobSpecFromJson(ParseBody(req)));
      SendJson(res, {{"job_id", id}}, 202);
    }));

    server.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", Guard([this](const httplib::Request& req,
                                                             httplib::Response& res) {
      SendJson(res, JobSnapshotToJson(svc_.jobs().Poll(req.matches[1].str())));
    }));

    server.Get(R"(/api/jobs/([A-Za-z0-9_-]+)/artifacts/([a-z]+))",
               Guard([this](const httplib::Request& req, httplib::Response& res) {
                 const auto which = ParseArtifact(req.matches[2].str());
                 if (!which) throw NotFound("unknown artifact '" + req.matches[2].str() + "'");
                 const std::string id = req.matches[1].str();
                 const Bytes b = svc_.jobs().Fetch(id, *which);
                 switch (*which) {
                   case Artifact::kReport: SendBytes(res, b, "application/json"); break;
                   case Artifact::kBlob: SendBytes(res, b, "application/octet-stream"); break;
                   default: SendBytes(res, b, "image/x-portable-graymap"); break;
                 }
                 if (*which == Artifact::kDiff) {
                   const JobSnapshot s = svc_.jobs().Poll(id);
                   if (s.max_diff) res.set_header("X-Max-Diff", std::to_string(*s.max_diff));
                 }
               }));

    server.Post("/api/estimate", Guard([this](const httplib::Request& req,
                                              httplib::Response& res) {
      const json body = ParseBody(req);
      JobSpec spec;
      try {
        spec.image_id = body.at("image_id").get<std::string>();
        spec.codec_id = body.at("codec_id").get<std::string>();
        spec.metric_id = body.at("metric_id").get<std::string>();
        if (body.contains("param_min") && !body["param_min"].is_null()) spec.param_min = body["param_min"].get<double>();
        if (body.contains("param_max") && !body["param_max"].is_null()) spec.param_max = body["param_max"].get<double>();
      } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad estimate request: ") + e.what());
      }
      JobManager& jobs = svc_.jobs();
      const RasterImage image = svc_.images().Get(spec.image_id);
      const CodecPtr codec = jobs.codecs().Get(spec.codec_id);
      const Metric metric = ResolveMetric(*codec, jobs.metrics(), spec.metric_id);
      const ParameterRange range = jobs.RangeFor(spec, image);
      const MetricSpan span = EstimateRange(image, *codec, metric, range);
      SendJson(res, {{"codec_id", spec.codec_id},
                     {"metric_id", spec.metric_id},
                     {"range", {{"kind", ParamKindName(range.kind)},
                                {"min", range.min},
                                {"max", range.max}}},
                     {"at_min", span.at_min.value},
                     {"at_max", span.at_max.value},
                     {"achievable", {span.low, span.high}}});
    }));

    server.Get("/api/codecs", Guard([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      const CodecRegistry& reg = svc_.jobs().codecs();
      for (const std::string& id : reg.Ids()) {
        const CodecDescriptor& d = reg.Get(id)->descriptor();
        const ParameterRange r8 = reg.Get(id)->DefaultRange(8);
        const ParameterRange r16 = reg.Get(id)->DefaultRange(16);
        list.push_back({{"codec_id", d.codec_id},
                        {"param_kind", ParamKindName(d.param_kind)},
                        {"quality_direction", QualityDirectionName(d.quality_direction)},
                        {"default_range", {{"8", {r8.min, r8.max}}, {"16", {r16.min, r16.max}}}}});
      }
      SendJson(res, list);
    }));

    server.Get("/api/metrics", Guard([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      const MetricRegistry& reg = svc_.jobs().metrics();
      for (const std::string& id : reg.Ids()) {
        const MetricDescriptor& d = reg.Get(id).descriptor;
        list.push_back({{"metric_id", d.id},
                        {"units", d.units == MetricUnits::kDecibels ? "decibels" : "unitless"},
                        {"range", {d.range_min, d.range_max}},
                        {"higher_is_better", d.higher_is_better},
                        {"default_tolerance", DefaultTolerance(d)}});
      }
      SendJson(res, list);
    }));
  }

  Service& svc_;
};

Service::Service(ServiceConfig config, CodecRegistry codecs,
                 const MetricRegistry& metrics) {
  if (config.data_dir.empty()) throw InvalidArgument("service needs a data directory");
  images_ = std::make_unique<ImageStore>(config.data_dir / "images");
  jobs_ = std::make_unique<JobManager>(config.data_dir, *images_, std::move(codecs),
                                       metrics, config.workers);
  http_ = std::make_unique<Http>(*this);
}

Service::~Service() {
  Stop();
  jobs_.reset();
}

int Service::Bind(const std::string& host, int port) {
  if (port == 0) return http_->server.bind_to_any_port(host);
  return http_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::Listen() { return http_->server.listen_after_bind(); }

void Service::Stop() {
  if (http_) http_->server.stop();
}

}  // namespace qpress
