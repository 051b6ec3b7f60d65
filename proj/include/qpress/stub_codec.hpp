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

// Deterministic test double for the search procedures: the designated
// metric measured on stub output is exactly profile(param).

#ifndef QPRESS_STUB_CODEC_HPP_
#define QPRESS_STUB_CODEC_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpress/codec.hpp"

namespace qpress {

// Metric response m(p) over a closed parameter domain.
class ResponseProfile {
 public:
  // m(p) = intercept + slope * p
  static ResponseProfile Affine(double intercept, double slope, double lo, double hi);
  // m(p) = intercept + slope * log2(p)
  static ResponseProfile Log2(double intercept, double slope, double lo, double hi);
  // Piecewise-linear through (param, value) points sorted by param.
  static ResponseProfile Tabulated(std::vector<std::pair<double, double>> points);
  // Text form used by the CLI:
  //   affine:<a>,<b>@<lo>,<hi>     log2:<a>,<b>@<lo>,<hi>
  //   table:<p1>=<m1>,<p2>=<m2>,...
  // with an optional suffix "~<amplitude>" adding deterministic noise.
  static ResponseProfile Parse(std::string_view text);

  // Adds a deterministic perturbation u(p), |u| <= amplitude.
  ResponseProfile WithNoise(double amplitude, std::uint64_t seed = 1) const;

  // Throws InvalidArgument outside [domain_min, domain_max].
  double operator()(double param) const;

  double domain_min() const { return lo_; }
  double domain_max() const { return hi_; }
  // +1 if increasing, -1 if decreasing.
  int orientation() const { return orientation_; }

 private:
  ResponseProfile(std::function<double(double)> fn, double lo, double hi);
  void CheckMonotone();

  std::function<double(double)> fn_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  int orientation_ = 0;
};

struct StubOptions {
  ParamKind param_kind = ParamKind::kQuantizationStep;
  std::string codec_id = "stub";
  // Metric id whose evaluator the stub replaces.
  std::string designated_metric = "psnr";
  // Payload length as a function of (raw sample bytes, param). Defaults to
  // ceil(raw_bytes / param), floored at the 8 bytes the stub needs.
  std::function<std::size_t(std::size_t, double)> payload_length;
  // Artificial per-compress latency, for exercising progress reporting.
  std::chrono::milliseconds delay{0};
};

class StubCodec final : public Codec {
 public:
  // Rejects non-monotone profiles and direction/kind contradictions.
  explicit StubCodec(ResponseProfile profile, StubOptions options = {});

  const CodecDescriptor& descriptor() const override { return descriptor_; }
  CompressedBlob Compress(const RasterImage& image,
                          ControlParameter param) const override;
  RasterImage Decompress(const CompressedBlob& blob) const override;
  ParameterRange DefaultRange(int) const override { return descriptor_.default_range; }
  std::optional<Metric> MetricOverride(std::string_view metric_id) const override;

  const ResponseProfile& profile() const { return profile_; }
  // Metric evaluator that reads the embedded parameter back out of a
  // decompressed stub image.
  Metric DesignatedMetric() const;

 private:
  ResponseProfile profile_;
  StubOptions options_;
  CodecDescriptor descriptor_;
};

}  // namespace qpress

#endif  // QPRESS_STUB_CODEC_HPP_
