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

// Finding the control parameter that makes a codec hit a metric target.

#ifndef QPRESS_SEARCH_HPP_
#define QPRESS_SEARCH_HPP_

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpress/codec.hpp"
#include "qpress/error.hpp"

namespace qpress {

inline constexpr double kDefaultDecibelTolerance = 0.1;
inline constexpr double kDefaultUnitlessTolerance = 0.005;

struct QualityTarget {
  std::string metric_id;
  double value = 0.0;
  double tolerance = kDefaultDecibelTolerance;

  // Throws InvalidArgument unless tolerance > 0 and value lies in the
  // metric's declared range.
  void Validate(const MetricDescriptor& metric) const;
};

enum class SearchStatus {
  kConverged,
  kExhaustedResolution,
  kClampedToMinParam,
  kClampedToMaxParam,
};
std::string_view SearchStatusName(SearchStatus s);
SearchStatus ParseSearchStatus(std::string_view name);

enum class SearchMethod { kBisect, kInterpolate };
std::string_view SearchMethodName(SearchMethod m);
// "bisect" or "interp" (also "interpolate").
SearchMethod ParseSearchMethod(std::string_view name);

// One compress -> decompress -> measure cycle.
struct Probe {
  double param = 0.0;
  double value = 0.0;
  friend bool operator==(const Probe&, const Probe&) = default;
};

// Metric values at both ends of the parameter range.
struct MetricSpan {
  MetricValue at_min;  // measured at range.min
  MetricValue at_max;  // measured at range.max
  double low = 0.0;    // min of the two
  double high = 0.0;   // max of the two

  // True iff target lies within [low - tolerance, high + tolerance].
  bool Admits(const QualityTarget& target) const;
};

struct SearchResult {
  SearchStatus status = SearchStatus::kConverged;
  MetricValue achieved;
  ControlParameter final_param;
  // Search probes only; the two endpoint probes are in endpoint_probes.
  int iterations = 0;
  std::vector<Probe> history;
  std::vector<Probe> endpoint_probes;
  MetricSpan span;
  ParameterRange range;
  double cr = 0.0;
  double bpp = 0.0;
  CompressedBlob blob;
};

// The target lies outside the achievable interval.
class InfeasibleTarget : public Error {
 public:
  InfeasibleTarget(const QualityTarget& target, const MetricSpan& span);
  const MetricSpan& span() const { return span_; }
  double target() const { return target_; }

 private:
  MetricSpan span_;
  double target_;
};

struct SearchOptions {
  // 0 selects the method default: 12 for bisection, 10 for interpolation.
  int max_iters = 0;
  // Return the nearest endpoint instead of throwing InfeasibleTarget.
  bool clamp = false;
  // First interpolation probe; default sqrt(min * max).
  std::optional<double> seed;
  // Called after every probe, endpoints included, in order.
  std::function<void(const Probe&, bool endpoint)> on_probe;
};

// A compression probe: compress at `param`, reconstruct, measure against
// the original. Lets callers insert transforms around the codec.
struct ProbeOutcome {
  double value = 0.0;
  CompressedBlob blob;
};
using ProbeFn = std::function<ProbeOutcome(double param)>;

struct SearchProblem {
  ProbeFn probe;
  const RasterImage* original = nullptr;  // for CR and bpp
  MetricDescriptor metric;
  QualityDirection direction = QualityDirection::kMetricDecreasesWithParam;
  ParameterRange range;
};

// Probe that runs `codec` directly on `image` and measures with `metric`.
SearchProblem MakeProblem(const RasterImage& image, const Codec& codec,
                          const Metric& metric, const ParameterRange& range);

// Two compress cycles, at range.min and range.max.
MetricSpan EstimateRange(const RasterImage& image, const Codec& codec,
                         const Metric& metric, const ParameterRange& range);

// Interval halving on the parameter axis.
SearchResult BisectionSearch(const SearchProblem& problem,
                             const QualityTarget& target,
                             const SearchOptions& options = {});
// Seeded probe, logarithmic bracketing step, then secant steps kept inside
// the current bracket.
SearchResult InterpolationSearch(const SearchProblem& problem,
                                 const QualityTarget& target,
                                 const SearchOptions& options = {});

SearchResult RunSearch(SearchMethod method, const SearchProblem& problem,
                       const QualityTarget& target,
                       const SearchOptions& options = {});
// Convenience form over MakeProblem.
SearchResult RunSearch(SearchMethod method, const RasterImage& image,
                       const Codec& codec, const Metric& metric,
                       const QualityTarget& target, const ParameterRange& range,
                       const SearchOptions& options = {});

}  // namespace qpress

#endif  // QPRESS_SEARCH_HPP_
