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

#include "qpress/multichannel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace qpress {

using nlohmann::json;

HomomorphicTransform HomomorphicTransform::ForRange(double input_max,
                                                    double full_scale) {
  if (!(input_max > 0) || !(full_scale > 0) || !std::isfinite(input_max) ||
      !std::isfinite(full_scale)) {
    throw InvalidArgument("homomorphic transform needs positive input_max and full_scale");
  }
  HomomorphicTransform t;
  t.input_max = input_max;
  t.full_scale = full_scale;
  t.scale = full_scale / std::log1p(input_max);
  return t;
}

HomomorphicTransform HomomorphicTransform::Fit(const RasterImage& band) {
  const auto s = band.samples();
  const std::uint16_t peak = s.empty() ? 0 : *std::max_element(s.begin(), s.end());
  return ForRange(std::max<double>(peak, 1.0), band.max_value());
}

std::uint16_t HomomorphicTransform::Forward(std::uint32_t x) const {
  const double y = std::round(scale * std::log1p(double(x)));
  return static_cast<std::uint16_t>(std::clamp(y, 0.0, full_scale));
}

std::uint16_t HomomorphicTransform::Inverse(std::uint32_t y) const {
  const double x = std::round(std::expm1(double(y) / scale));
  return static_cast<std::uint16_t>(std::clamp(x, 0.0, input_max));
}

RasterImage HomomorphicTransform::Forward(const RasterImage& band) const {
  if (full_scale > band.max_value()) {
    throw InvalidArgument("transform full scale exceeds the band's bit depth");
  }
  std::vector<std::uint16_t> out(band.pixel_count());
  const auto s = band.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > input_max) {
      throw InvalidArgument("sample " + std::to_string(s[i]) +
                            " exceeds the transform's input_max");
    }
    out[i] = Forward(s[i]);
  }
  return RasterImage(band.width(), band.height(), band.bit_depth(), std::move(out));
}

RasterImage HomomorphicTransform::Inverse(const RasterImage& band) const {
  if (input_max > band.max_value()) {
    throw InvalidArgument("transform input_max exceeds the band's bit depth");
  }
  std::vector<std::uint16_t> out(band.pixel_count());
  const auto s = band.samples();
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = Inverse(s[i]);
  return RasterImage(band.width(), band.height(), band.bit_depth(), std::move(out));
}

CubeFailure::CubeFailure(std::size_t band, std::string message,
                         std::vector<BandResult> partial,
                         std::optional<SearchReport> failed_report)
    : Error("band " + std::to_string(band) + ": " + message),
      band_(band),
      partial_(std::move(partial)),
      failed_report_(std::move(failed_report)) {}

SearchProblem MakeBandProblem(const RasterImage& band, const Codec& codec,
                              const Metric& metric, const ParameterRange& range,
                              const std::optional<HomomorphicTransform>& transform) {
  SearchProblem problem = MakeProblem(band, codec, metric, range);
  if (!transform) return problem;
  // The codec sees the transformed band; the metric sees the original.
  problem.probe = [&band, &codec, eval = metric.evaluate, kind = range.kind,
                   t = *transform,
                   forward = std::make_shared<RasterImage>(transform->Forward(band))](
                      double p) {
    ProbeOutcome out;
    out.blob = codec.Compress(*forward, {kind, p});
    out.value = eval(band, t.Inverse(codec.Decompress(out.blob)));
    return out;
  };
  return problem;
}

RasterImage DecodeBand(const Codec& codec, const CompressedBlob& blob,
                       const std::optional<HomomorphicTransform>& transform) {
  RasterImage img = codec.Decompress(blob);
  return transform ? transform->Inverse(img) : img;
}

double AggregateCompressionRatio(const std::vector<BandResult>& bands,
                                 const SpectralCube& cube) {
  double raw = 0.0;
  double payload = 0.0;
  for (const BandResult& b : bands) {
    raw += double(cube.band(b.index).raw_bytes());
    payload += double(b.result.blob.payload.size());
  }
  return payload > 0 ? raw / payload : 0.0;
}

CubeResult CompressCube(const SpectralCube& cube, const CubeRequest& request) {
  if (!request.codec) throw InvalidArgument("cube request has no codec");
  request.range.Validate();
  request.target.Validate(request.metric.descriptor);
  const std::size_t n = cube.band_count();
  std::size_t workers = request.threads > 0
                            ? std::size_t(request.threads)
                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);

  std::vector<std::optional<BandResult>> slots(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::optional<std::size_t> failed_band;
  std::string failed_message;
  std::optional<SearchReport> failed_report;

  auto work = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const RasterImage& band = cube.band(i);
      try {
        BandResult br;
        br.index = i;
        if (request.use_homomorphic) br.transform = HomomorphicTransform::Fit(band);
        const SearchProblem problem = MakeBandProblem(
            band, *request.codec, request.metric, request.range, br.transform);
        SearchOptions opts = request.search;
        opts.on_probe = nullptr;
        if (request.on_probe) {
          opts.on_probe = [&request, i](const Probe& p, bool endpoint) {
            request.on_probe(i, p, endpoint);
          };
        }
        br.result = RunSearch(request.method, problem, request.target, opts);
        slots[i] = std::move(br);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        abort.store(true);
        if (!failed_band || i < *failed_band) {
          failed_band = i;
          failed_message = e.what();
          failed_report.reset();
          if (const auto* inf = dynamic_cast<const InfeasibleTarget*>(&e)) {
            failed_report = MakeInfeasibleReport(*inf, request.codec->id(),
                                                 request.target, request.range,
                                                 request.method);
          }
        }
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  std::vector<BandResult> done;
  for (auto& s : slots) {
    if (s) done.push_back(std::move(*s));
  }
  if (failed_band) {
    throw CubeFailure(*failed_band, failed_message, std::move(done),
                      std::move(failed_report));
  }
  CubeResult result;
  result.aggregate_cr = AggregateCompressionRatio(done, cube);
  for (const BandResult& b : done) result.total_iterations += b.result.iterations;
  result.per_band = std::move(done);
  return result;
}

json CubeManifest(const SpectralCube& cube, const CubeRequest& request,
                  const std::vector<BandResult>& bands,
                  const std::vector<std::string>& blob_names,
                  const CubeFailure* failure) {
  json j;
  j["schema"] = kCubeManifestSchema;
  j["width"] = cube.width();
  j["height"] = cube.height();
  j["bit_depth"] = cube.bit_depth();
  j["band_count"] = cube.band_count();
  j["codec_id"] = request.codec ? request.codec->id() : std::string();
  j["metric_id"] = request.target.metric_id;
  j["target"] = request.target.value;
  j["tolerance"] = request.target.tolerance;
  j["method"] = SearchMethodName(request.method);
  j["homomorphic"] = request.use_homomorphic;
  j["status"] = failure ? "failed" : "ok";

  std::vector<const BandResult*> by_index(cube.band_count(), nullptr);
  for (const BandResult& b : bands) by_index.at(b.index) = &b;
  int total_iterations = 0;
  json list = json::array();
  for (std::size_t i = 0; i < cube.band_count(); ++i) {
    json e;
    e["index"] = i;
    e["label"] = i < cube.labels().size() ? cube.labels()[i] : std::string();
    if (const BandResult* b = by_index[i]) {
      e["blob"] = i < blob_names.size() ? json(blob_names[i]) : json(nullptr);
      e["transform"] =
          b->transform ? json{{"kind", "log1p_scaled"},
                              {"scale", b->transform->scale},
                              {"input_max", b->transform->input_max},
                              {"full_scale", b->transform->full_scale}}
                       : json(nullptr);
      e["report"] = ReportToJson(MakeReport(b->result, request.codec->id(),
                                            request.target, request.method));
      total_iterations += b->result.iterations;
    } else {
      e["blob"] = nullptr;
      e["transform"] = nullptr;
      if (failure && failure->band() == i && failure->failed_report()) {
        e["report"] = ReportToJson(*failure->failed_report());
      } else {
        e["report"] = nullptr;
      }
    }
    list.push_back(std::move(e));
  }
  j["bands"] = std::move(list);
  j["aggregate_cr"] = bands.empty() ? json(nullptr)
                                    : json(AggregateCompressionRatio(bands, cube));
  j["total_iterations"] = total_iterations;
  if (failure) j["failure"] = {{"band", failure->band()}, {"error", failure->what()}};
  return j;
}

}  // namespace qpress
