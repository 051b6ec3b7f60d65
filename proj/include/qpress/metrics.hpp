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

// Full-reference quality metrics. Every metric takes (reference, distorted)
// images of identical geometry and returns a value where higher is better.
// Decibel metrics saturate at kDecibelCap for zero-error pairs.

#ifndef QPRESS_METRICS_HPP_
#define QPRESS_METRICS_HPP_

#include <array>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qpress/image.hpp"

namespace qpress {

inline constexpr double kDecibelCap = 100.0;

enum class MetricUnits { kDecibels, kUnitless };

struct MetricDescriptor {
  std::string id;
  MetricUnits units = MetricUnits::kDecibels;
  double range_min = 0.0;
  double range_max = kDecibelCap;
  bool higher_is_better = true;

  // Best attainable value: the cap for dB metrics, 1 for unitless ones.
  double best_value() const { return range_max; }
};

using MetricFn =
    std::function<double(const RasterImage& ref, const RasterImage& dist)>;

struct Metric {
  MetricDescriptor descriptor;
  MetricFn evaluate;
};

struct MetricValue {
  std::string metric_id;
  double value = 0.0;
  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

double Psnr(const RasterImage& ref, const RasterImage& dist);

// Mean SSIM over 11x11 Gaussian windows (sigma 1.5) fully inside the image.
double Ssim(const RasterImage& ref, const RasterImage& dist);

// Five-scale SSIM with exponents kMsssimWeights. Images too small for five
// scales use fewer, with the exponents renormalized to sum to one.
inline constexpr std::array<double, 5> kMsssimWeights = {
    0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
double Msssim(const RasterImage& ref, const RasterImage& dist);

// Signal energy over CSF-weighted error energy, both in the 2-D DFT domain.
double Wsnr(const RasterImage& ref, const RasterImage& dist);

// 8x8 block-DCT PSNR with CSF weighting; partial trailing blocks are skipped.
double PsnrHvs(const RasterImage& ref, const RasterImage& dist);
// As PsnrHvs, with the per-block contrast-masking allowance subtracted.
double PsnrHvsM(const RasterImage& ref, const RasterImage& dist);

struct HvsPair {
  double psnr_hvs;
  double psnr_hvs_m;
};
// Both HVS metrics in one pass over the blocks.
HvsPair PsnrHvsBoth(const RasterImage& ref, const RasterImage& dist);

// CSF and masking tables of the PSNR-HVS family, row = vertical frequency.
extern const std::array<std::array<double, 8>, 8> kHvsCsf;
extern const std::array<std::array<double, 8>, 8> kHvsMask;

// Name -> (descriptor, evaluator). Builtins are psnr, ssim, msssim, wsnr,
// psnr_hvs and psnr_hvs_m; more can be added at startup.
class MetricRegistry {
 public:
  static MetricRegistry WithBuiltins();

  void Add(Metric metric);
  // Throws InvalidArgument for unknown ids.
  const Metric& Get(std::string_view id) const;
  bool Contains(std::string_view id) const;
  std::vector<std::string> Ids() const;

 private:
  std::map<std::string, Metric, std::less<>> metrics_;
};

// Shared, immutable registry of the six builtin metrics.
const MetricRegistry& BuiltinMetrics();

}  // namespace qpress

#endif  // QPRESS_METRICS_HPP_
