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

// qpress: compress images to a target quality.
//
// Exit status: 0 converged (or clamped on request), 1 I/O or configuration
// error, 2 infeasible target, 3 resolution exhausted, 4 a cube band failed.

#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qpress/dct_codec.hpp"
#include "qpress/error.hpp"
#include "qpress/external_codec.hpp"
#include "qpress/multichannel.hpp"
#include "qpress/report.hpp"
#include "qpress/service.hpp"
#include "qpress/stub_codec.hpp"

namespace fs = std::filesystem;
using namespace qpress;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInfeasible = 2, kExhausted = 3, kBandFailed = 4 };

// Codec registration flags shared by every subcommand.
struct CodecFlags {
  std::vector<std::string> configs;
  std::string stub_profile;
  std::string stub_kind = "quantization_step";
  std::string stub_metric;
  int stub_delay_ms = 0;

  void Add(CLI::App* app) {
    app->add_option("--codec-config", configs, "External codec config file")
        ->check(CLI::ExistingFile);
    app->add_option("--stub-profile", stub_profile,
                    "Register a 'stub' codec, e.g. affine:60,-1@1,50");
    app->add_option("--stub-kind", stub_kind, "Stub parameter kind");
    app->add_option("--stub-metric", stub_metric,
                    "Metric the stub answers (default: --metric or psnr)");
    app->add_option("--stub-delay-ms", stub_delay_ms, "Stub latency per probe")
        ->check(CLI::NonNegativeNumber);
  }

  CodecRegistry Build(const std::string& metric_id) const {
    CodecRegistry reg = CodecRegistry::WithBuiltins();
    for (const std::string& path : configs) reg.Add(LoadExternalCodec(path));
    if (!stub_profile.empty()) {
      StubOptions o;
      o.param_kind = ParseParamKind(stub_kind);
      o.designated_metric =
          !stub_metric.empty() ? stub_metric : (metric_id.empty() ? "psnr" : metric_id);
      o.delay = std::chrono::milliseconds(stub_delay_ms);
      reg.Add(std::make_shared<StubCodec>(ResponseProfile::Parse(stub_profile), o));
    }
    return reg;
  }
};

// Search flags shared by compress and cube.
struct SearchFlags {
  std::string codec = "dct";
  std::string metric = "psnr";
  double target = 0.0;
  std::optional<double> delta;
  std::optional<double> param_min;
  std::optional<double> param_max;
  std::string method = "interp";
  bool clamp = false;
  std::optional<double> seed;
  int max_iters = 0;

  void Add(CLI::App* app, bool with_target) {
    app->add_option("--codec", codec, "Codec id")->capture_default_str();
    app->add_option("--metric", metric, "Metric id")->capture_default_str();
    if (with_target) {
      app->add_option("--target", target, "Target metric value")->required();
      app->add_option("--delta", delta, "Tolerance (default 0.1 dB / 0.005)");
      app->add_option("--method", method, "bisect | interp")->capture_default_str();
      app->add_flag("--clamp", clamp, "Return the nearest endpoint when infeasible");
      app->add_option("--seed", seed, "First interpolation probe");
      app->add_option("--max-iters", max_iters, "Probe budget (0 = default)")
          ->check(CLI::NonNegativeNumber);
    }
    app->add_option("--param-min", param_min, "Lower parameter bound");
    app->add_option("--param-max", param_max, "Upper parameter bound");
  }

  ParameterRange Range(const Codec& c, int bit_depth) const {
    ParameterRange r = c.DefaultRange(bit_depth);
    if (param_min) r.min = *param_min;
    if (param_max) r.max = *param_max;
    r.Validate();
    return r;
  }

  QualityTarget Target(const Metric& m) const {
    const double tol = delta.value_or(m.descriptor.units == MetricUnits::kDecibels
                                          ? kDefaultDecibelTolerance
                                          : kDefaultUnitlessTolerance);
    QualityTarget t{metric, target, tol};
    t.Validate(m.descriptor);
    return t;
  }

  SearchOptions Options() const {
    SearchOptions o;
    o.clamp = clamp;
    o.seed = seed;
    o.max_iters = max_iters;
    return o;
  }
};

void CheckWritable(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) {
    throw IoError("output directory does not exist: " + parent.string());
  }
}

std::string Fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int ExitFor(SearchStatus s) {
  return s == SearchStatus::kExhaustedResolution ? kExhausted : kOk;
}

// --------------------------------------------------------------- commands

struct CompressCmd {
  CodecFlags codecs;
  SearchFlags search;
  std::string in, out, decoded_out, report;

  int Run() const {
    const CodecRegistry reg = codecs.Build(search.metric);
    const RasterImage image = LoadPgm(ReadFile(in));
    const CodecPtr codec = reg.Get(search.codec);
    const Metric metric = ResolveMetric(*codec, BuiltinMetrics(), search.metric);
    const QualityTarget target = search.Target(metric);
    const ParameterRange range = search.Range(*codec, image.bit_depth());
    const SearchMethod method = ParseSearchMethod(search.method);
    CheckWritable(out);
    CheckWritable(decoded_out);
    CheckWritable(report);

    ReportedRun run = RunWithReport(method, image, *codec, metric, target, range,
                                    search.Options());
    if (!report.empty()) WriteFileAtomic(report, SerializeReport(run.report));
    std::cout << SummaryLine(run.report) << "\n";
    if (!run.result) {
      std::cerr << "qpress: " << *run.report.error << "\n";
      return kInfeasible;
    }
    WriteFileAtomic(out, SerializeBlob(run.result->blob));
    if (!decoded_out.empty()) {
      WriteFileAtomic(decoded_out, StorePgm(codec->Decompress(run.result->blob)));
    }
    return ExitFor(run.result->status);
  }
};

struct EstimateCmd {
  CodecFlags codecs;
  SearchFlags search;
  std::string in;

  int Run() const {
    const CodecRegistry reg = codecs.Build(search.metric);
    const RasterImage image = LoadPgm(ReadFile(in));
    const CodecPtr codec = reg.Get(search.codec);
    const Metric metric = ResolveMetric(*codec, BuiltinMetrics(), search.metric);
    const ParameterRange range = search.Range(*codec, image.bit_depth());
    const MetricSpan span = EstimateRange(image, *codec, metric, range);
    std::cout << "metric=" << search.metric << " param_min=" << Fixed4(range.min)
              << " param_max=" << Fixed4(range.max)
              << " at_min=" << Fixed4(span.at_min.value)
              << " at_max=" << Fixed4(span.at_max.value) << " interval=["
              << Fixed4(span.low) << ", " << Fixed4(span.high) << "]\n";
    return kOk;
  }
};

struct CubeCmd {
  CodecFlags codecs;
  SearchFlags search;
  std::string in, desc, out_dir, report;
  bool homomorphic = false;
  int threads = 0;

  int Run() const {
    const CodecRegistry reg = codecs.Build(search.metric);
    const Bytes sidecar = ReadFile(desc);
    const RawDescriptor d = ParseRawDescriptor(
        std::string_view(reinterpret_cast<const char*>(sidecar.data()), sidecar.size()));
    const SpectralCube cube = LoadRaw(ReadFile(in), d);

    CubeRequest req;
    req.codec = reg.Get(search.codec);
    req.metric = ResolveMetric(*req.codec, BuiltinMetrics(), search.metric);
    req.target = search.Target(req.metric);
    req.range = search.Range(*req.codec, cube.bit_depth());
    req.method = ParseSearchMethod(search.method);
    req.use_homomorphic = homomorphic;
    req.search = search.Options();
    req.threads = threads;
    CheckWritable(report);
    fs::create_directories(out_dir);

    std::vector<std::string> names(cube.band_count());
    for (std::size_t i = 0; i < names.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "band_%03zu.qpcb", i);
      names[i] = buf;
    }
    auto write = [&](const std::vector<BandResult>& bands, const CubeFailure* f) {
      for (const BandResult& b : bands) {
        WriteFileAtomic(fs::path(out_dir) / names[b.index], SerializeBlob(b.result.blob));
      }
      const std::string manifest = CubeManifest(cube, req, bands, names, f).dump(2) + "\n";
      WriteFileAtomic(fs::path(out_dir) / "manifest.json", manifest);
      if (!report.empty()) WriteFileAtomic(report, manifest);
    };
    auto print = [&](const std::vector<BandResult>& bands) {
      for (const BandResult& b : bands) {
        std::cout << "band=" << b.index << " "
                  << SummaryLine(MakeReport(b.result, req.codec->id(), req.target,
                                            req.method))
                  << "\n";
      }
    };

    try {
      const CubeResult res = CompressCube(cube, req);
      write(res.per_band, nullptr);
      print(res.per_band);
      int exit = kOk;
      int converged = 0;
      for (const BandResult& b : res.per_band) {
        if (b.result.status == SearchStatus::kConverged) ++converged;
        if (b.result.status == SearchStatus::kExhaustedResolution) exit = kExhausted;
      }
      std::cout << "bands=" << cube.band_count() << " converged=" << converged
                << " aggregate_cr=" << Fixed4(res.aggregate_cr)
                << " total_iterations=" << res.total_iterations << "\n";
      return exit;
    } catch (const CubeFailure& f) {
      write(f.partial(), &f);
      print(f.partial());
      std::cerr << "qpress: " << f.what() << "\n";
      return kBandFailed;
    }
  }
};

struct MeasureCmd {
  std::string ref, dist;
  std::vector<std::string> metrics;
  bool all = false;

  int Run() const {
    const RasterImage a = LoadPgm(ReadFile(ref));
    const RasterImage b = LoadPgm(ReadFile(dist));
    if (!a.same_shape(b)) {
      throw InvalidArgument("images differ in size or bit depth");
    }
    std::vector<std::string> ids = metrics;
    if (all) {
      ids = {"psnr", "ssim", "msssim", "wsnr", "psnr_hvs", "psnr_hvs_m"};
    }
    if (ids.empty()) throw InvalidArgument("give --metric <id> or --all");
    for (const std::string& id : ids) BuiltinMetrics().Get(id);
    for (const std::string& id : ids) {
      std::cout << id << " " << Fixed4(BuiltinMetrics().Get(id).evaluate(a, b)) << "\n";
    }
    return kOk;
  }
};

struct EncodeCmd {
  CodecFlags codecs;
  std::string in, out, codec = "dct";
  double param = 0.0;

  int Run() const {
    const CodecRegistry reg = codecs.Build("");
    const CodecPtr c = reg.Get(codec);
    const RasterImage image = LoadPgm(ReadFile(in));
    CheckWritable(out);
    WriteFileAtomic(out, SerializeBlob(c->Compress(image, {c->descriptor().param_kind, param})));
    return kOk;
  }
};

struct DecodeCmd {
  CodecFlags codecs;
  std::string in, out;

  int Run() const {
    const CodecRegistry reg = codecs.Build("");
    const CompressedBlob blob = ParseBlob(ReadFile(in));
    CheckWritable(out);
    WriteFileAtomic(out, StorePgm(reg.Get(blob.codec_id)->Decompress(blob)));
    return kOk;
  }
};

struct ServeCmd {
  CodecFlags codecs;
  std::string data_dir, host = "127.0.0.1";
  int port = 8080;
  int workers = 2;

  int Run() const {
    // Signals are collected by a dedicated thread.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    Service svc({data_dir, workers}, codecs.Build(""));
    const int bound = svc.Bind(host, port);
    if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    std::thread stopper([&svc, set] {
      int sig = 0;
      sigwait(&set, &sig);
      svc.Stop();
    });
    svc.Listen();
    // Wake the stopper if Listen returned on its own.
    pthread_kill(stopper.native_handle(), SIGTERM);
    stopper.join();
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpress: compress images to a target quality"};
  app.require_subcommand(1);

  CompressCmd compress;
  {
    CLI::App* c = app.add_subcommand("compress", "Search the parameter that meets a target");
    c->add_option("--in", compress.in, "Input PGM")->required();
    c->add_option("--out", compress.out, "Output container")->required();
    c->add_option("--decoded-out", compress.decoded_out, "Decoded PGM");
    c->add_option("--report", compress.report, "JSON report");
    compress.search.Add(c, true);
    compress.codecs.Add(c);
  }
  EstimateCmd estimate;
  {
    CLI::App* c = app.add_subcommand("estimate", "Metric values at both range ends");
    c->add_option("--in", estimate.in, "Input PGM")->required();
    estimate.search.Add(c, false);
    estimate.codecs.Add(c);
  }
  CubeCmd cube;
  {
    CLI::App* c = app.add_subcommand("cube", "Band-by-band compression of a RAW cube");
    c->add_option("--in", cube.in, "RAW samples")->required();
    c->add_option("--desc", cube.desc, "Sidecar descriptor")->required();
    c->add_option("--out", cube.out_dir, "Output directory")->required();
    c->add_option("--report", cube.report, "Copy of the manifest");
    c->add_flag("--homomorphic", cube.homomorphic, "Compress in the log1p domain");
    c->add_option("--threads", cube.threads, "Worker threads (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    cube.search.Add(c, true);
    cube.codecs.Add(c);
  }
  MeasureCmd measure;
  {
    CLI::App* c = app.add_subcommand("measure", "Compare two images");
    c->add_option("--ref", measure.ref, "Reference PGM")->required();
    c->add_option("--dist", measure.dist, "Distorted PGM")->required();
    c->add_option("--metric", measure.metrics, "Metric id (repeatable)");
    c->add_flag("--all", measure.all, "All six metrics");
  }
  EncodeCmd encode;
  {
    CLI::App* c = app.add_subcommand("encode", "Compress at a fixed parameter");
    c->add_option("--in", encode.in, "Input PGM")->required();
    c->add_option("--out", encode.out, "Output container")->required();
    c->add_option("--codec", encode.codec, "Codec id")->capture_default_str();
    c->add_option("--param", encode.param, "Control parameter")->required();
    encode.codecs.Add(c);
  }
  DecodeCmd decode;
  {
    CLI::App* c = app.add_subcommand("decode", "Decode a container");
    c->add_option("--in", decode.in, "Input container")->required();
    c->add_option("--out", decode.out, "Output PGM")->required();
    decode.codecs.Add(c);
  }
  ServeCmd serve;
  {
    CLI::App* c = app.add_subcommand("serve", "Run the HTTP job service");
    c->add_option("--data-dir", serve.data_dir, "Store directory")->required();
    c->add_option("--host", serve.host, "Bind address")->capture_default_str();
    c->add_option("--port", serve.port, "Port (0 = ephemeral)")->capture_default_str();
    c->add_option("--workers", serve.workers, "Concurrent jobs")->capture_default_str();
    serve.codecs.Add(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "compress") return compress.Run();
    if (name == "estimate") return estimate.Run();
    if (name == "cube") return cube.Run();
    if (name == "measure") return measure.Run();
    if (name == "encode") return encode.Run();
    if (name == "decode") return decode.Run();
    if (name == "serve") return serve.Run();
  } catch (const std::exception& e) {
    std::cerr << "qpress: error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
