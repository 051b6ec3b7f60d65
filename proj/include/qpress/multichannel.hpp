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

// Band-by-band compression of spectral cubes and the log1p dynamic-range
// transform.

#ifndef QPRESS_MULTICHANNEL_HPP_
#define QPRESS_MULTICHANNEL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpress/report.hpp"
#include "qpress/search.hpp"

namespace qpress {

// y = round(scale * ln(1 + x)),  x = round(exp(y / scale) - 1).
struct HomomorphicTransform {
  double scale = 1.0;
  double input_max = 1.0;
  double full_scale = 1.0;

  // scale = full_scale / ln(1 + input_max), so input_max maps to full_scale.
  static HomomorphicTransform ForRange(double input_max, double full_scale);
  // input_max = the band's largest sample (at least 1), full_scale = the
  // largest value the band's bit depth can hold.
  static HomomorphicTransform Fit(const RasterImage& band);

  std::uint16_t Forward(std::uint32_t x) const;
  // Clamped to [0, input_max].
  std::uint16_t Inverse(std::uint32_t y) const;

  // Throws InvalidArgument if a sample exceeds input_max or the output would
  // not fit the band's bit depth.
  RasterImage Forward(const RasterImage& band) const;
  RasterImage Inverse(const RasterImage& band) const;

  friend bool operator==(const HomomorphicTransform&,
                         const HomomorphicTransform&) = default;
};

struct BandResult {
  std::size_t index = 0;
  SearchResult result;
  std::optional<HomomorphicTransform> transform;
};

struct CubeResult {
  std::vector<BandResult> per_band;  // ordered by band index
  double aggregate_cr = 0.0;         // sum of raw bytes / sum of payload bytes
  int total_iterations = 0;
};

struct CubeRequest {
  CodecPtr codec;
  Metric metric;
  QualityTarget target;
  ParameterRange range;
  SearchMethod method = SearchMethod::kInterpolate;
  bool use_homomorphic = false;
  // clamp, max_iters and seed apply to every band; on_probe is ignored.
  SearchOptions search;
  // 0 = one worker per hardware thread, capped at the band count.
  int threads = 0;
  // Called from worker threads; must be thread-safe.
  std::function<void(std::size_t band, const Probe&, bool endpoint)> on_probe;
};

// A band failed. Bands that finished before the abort are in `partial`.
class CubeFailure : public Error {
 public:
  CubeFailure(std::size_t band, std::string message,
              std::vector<BandResult> partial,
              std::optional<SearchReport> failed_report);
  std::size_t band() const { return band_; }
  const std::vector<BandResult>& partial() const { return partial_; }
  // Present when the failure was an infeasible target.
  const std::optional<SearchReport>& failed_report() const { return failed_report_; }

 private:
  std::size_t band_;
  std::vector<BandResult> partial_;
  std::optional<SearchReport> failed_report_;
};

// Each band searched independently; metric always measured in the original
// sample domain, also when compressing in the transformed one.
CubeResult CompressCube(const SpectralCube& cube, const CubeRequest& request);

// Search problem for one band, optionally wrapped in a transform.
SearchProblem MakeBandProblem(const RasterImage& band, const Codec& codec,
                              const Metric& metric, const ParameterRange& range,
                              const std::optional<HomomorphicTransform>& transform);

// Decodes a band blob, undoing the transform if one was used.
RasterImage DecodeBand(const Codec& codec, const CompressedBlob& blob,
                       const std::optional<HomomorphicTransform>& transform);

double AggregateCompressionRatio(const std::vector<BandResult>& bands,
                                 const SpectralCube& cube);

inline constexpr std::string_view kCubeManifestSchema = "qpress.cube/1";

// Manifest for a (possibly partial) cube run. `blob_names[i]` is the file
// name of band i's blob; bands without a result are listed as missing.
nlohmann::json CubeManifest(const SpectralCube& cube, const CubeRequest& request,
                            const std::vector<BandResult>& bands,
                            const std::vector<std::string>& blob_names,
                            const CubeFailure* failure);

}  // namespace qpress

#endif  // QPRESS_MULTICHANNEL_HPP_
