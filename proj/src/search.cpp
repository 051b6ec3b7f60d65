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

#include "qpress/search.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace qpress {

namespace {

constexpr int kBisectMaxIters = 12;
constexpr int kInterpMaxIters = 10;
constexpr double kResolution = 1e-3;   // of the range width
constexpr double kInsideMargin = 0.1;  // clamp distance for wild secants

bool IsStepKind(ParamKind k) {
  return k == ParamKind::kQuantizationStep || k == ParamKind::kScalingFactor;
}

std::string FormatValue(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Shared state of one search: endpoint probes, history, best point so far
// and the current bracket.
class Run {
 public:
  Run(const SearchProblem& problem, const QualityTarget& target,
      const SearchOptions& options)
      : problem_(problem), target_(target), options_(options) {
    if (!problem.probe || !problem.original) {
      throw InvalidArgument("search problem is incomplete");
    }
    problem.range.Validate();
    if (target.metric_id != problem.metric.id) {
      throw InvalidArgument("target metric '" + target.metric_id +
                            "' does not match probe metric '" +
                            problem.metric.id + "'");
    }
    target.Validate(problem.metric);
    if (options.max_iters < 0) throw InvalidArgument("max_iters must be >= 1");
    // d(metric)/d(param) sign.
    slope_sign_ = problem.direction == QualityDirection::kMetricDecreasesWithParam
                      ? -1.0
                      : 1.0;
    eps_ = kResolution * (problem.range.max - problem.range.min);
  }

  // Measures both endpoints. Returns a finished result if the search is
  // already decided there (hit, clamp); throws InfeasibleTarget otherwise
  // when the target is out of reach.
  std::optional<SearchResult> Start() {
    const ParameterRange& r = problem_.range;
    ProbeOutcome a = problem_.probe(r.min);
    Note(r.min, a, /*endpoint=*/true);
    ProbeOutcome b = problem_.probe(r.max);
    Note(r.max, b, /*endpoint=*/true);

    span_.at_min = {problem_.metric.id, a.value};
    span_.at_max = {problem_.metric.id, b.value};
    span_.low = std::min(a.value, b.value);
    span_.high = std::max(a.value, b.value);
    lo_ = r.min;
    hi_ = r.max;

    const double da = std::abs(a.value - target_.value);
    const double db = std::abs(b.value - target_.value);
    const bool a_closer = da <= db;
    if (!span_.Admits(target_)) {
      if (!options_.clamp) throw InfeasibleTarget(target_, span_);
      if (da == db) {
        // Flat response: a target below it takes the cheaper end, above it
        // the finer one.
        const bool larger_is_coarser = r.kind != ParamKind::kBitsPerPixel;
        const bool want_coarse = target_.value < span_.low;
        return want_coarse == larger_is_coarser
                   ? Finish(SearchStatus::kClampedToMaxParam, r.max, std::move(b))
                   : Finish(SearchStatus::kClampedToMinParam, r.min, std::move(a));
      }
      return a_closer ? Finish(SearchStatus::kClampedToMinParam, r.min, std::move(a))
                      : Finish(SearchStatus::kClampedToMaxParam, r.max, std::move(b));
    }
    if (std::min(da, db) <= target_.tolerance) {
      return a_closer ? Finish(SearchStatus::kConverged, r.min, std::move(a))
                      : Finish(SearchStatus::kConverged, r.max, std::move(b));
    }
    return std::nullopt;
  }

  // One search probe. Returns true on a hit.
  bool Measure(double p) {
    ProbeOutcome out = problem_.probe(p);
    Note(p, out, /*endpoint=*/false);
    const bool hit = std::abs(out.value - target_.value) <= target_.tolerance;
    if (hit) {
      hit_ = std::move(out);
      hit_param_ = p;
      return true;
    }
    // Narrow the bracket around the target.
    if ((target_.value - out.value) * slope_sign_ > 0) {
      lo_ = p;
    } else {
      hi_ = p;
    }
    return false;
  }

  SearchResult Converged() {
    return Finish(SearchStatus::kConverged, hit_param_, std::move(*hit_));
  }
  SearchResult Exhausted() {
    return Finish(SearchStatus::kExhaustedResolution, best_param_,
                  std::move(*best_));
  }

  int MaxIters(int method_default) const {
    return options_.max_iters > 0 ? options_.max_iters : method_default;
  }
  bool Resolved() const { return hi_ - lo_ < eps_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double Mid() const { return 0.5 * (lo_ + hi_); }
  bool Inside(double p) const { return p > lo_ && p < hi_; }
  const std::vector<Probe>& history() const { return history_; }
  const MetricSpan& span() const { return span_; }
  double target() const { return target_.value; }

 private:
  void Note(double p, const ProbeOutcome& out, bool endpoint) {
    const Probe probe{p, out.value};
    (endpoint ? endpoints_ : history_).push_back(probe);
    const double d = std::abs(out.value - target_.value);
    if (!best_ || d < best_dist_) {
      best_ = out;
      best_param_ = p;
      best_dist_ = d;
    }
    if (options_.on_probe) options_.on_probe(probe, endpoint);
  }

  SearchResult Finish(SearchStatus status, double p, ProbeOutcome out) {
    SearchResult res;
    res.status = status;
    res.achieved = {problem_.metric.id, out.value};
    res.final_param = {problem_.range.kind, p};
    res.history = history_;
    res.iterations = static_cast<int>(history_.size());
    res.endpoint_probes = endpoints_;
    res.span = span_;
    res.range = problem_.range;
    res.cr = CompressionRatio(*problem_.original, out.blob);
    res.bpp = BitsPerPixel(*problem_.original, out.blob);
    res.blob = std::move(out.blob);
    return res;
  }

  const SearchProblem& problem_;
  const QualityTarget& target_;
  const SearchOptions& options_;
  double slope_sign_ = -1.0;
  double eps_ = 0.0;
  MetricSpan span_;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<Probe> endpoints_;
  std::vector<Probe> history_;
  std::optional<ProbeOutcome> best_;
  double best_param_ = 0.0;
  double best_dist_ = 0.0;
  std::optional<ProbeOutcome> hit_;
  double hit_param_ = 0.0;
};

}  // namespace

void QualityTarget::Validate(const MetricDescriptor& metric) const {
  if (!(tolerance > 0) || !std::isfinite(tolerance)) {
    throw InvalidArgument("tolerance must be a positive number");
  }
  if (!std::isfinite(value) || value < metric.range_min ||
      value > metric.range_max) {
    throw InvalidArgument("target " + FormatValue(value) + " outside the range [" +
                          FormatValue(metric.range_min) + ", " +
                          FormatValue(metric.range_max) + "] of metric '" +
                          metric.id + "'");
  }
}

std::string_view SearchStatusName(SearchStatus s) {
  switch (s) {
    case SearchStatus::kConverged: return "converged";
    case SearchStatus::kExhaustedResolution: return "exhausted_resolution";
    case SearchStatus::kClampedToMinParam: return "clamped_to_min_param";
    case SearchStatus::kClampedToMaxParam: return "clamped_to_max_param";
  }
  return "?";
}

SearchStatus ParseSearchStatus(std::string_view name) {
  for (SearchStatus s :
       {SearchStatus::kConverged, SearchStatus::kExhaustedResolution,
        SearchStatus::kClampedToMinParam, SearchStatus::kClampedToMaxParam}) {
    if (SearchStatusName(s) == name) return s;
  }
  throw InvalidArgument("unknown search status '" + std::string(name) + "'");
}

std::string_view SearchMethodName(SearchMethod m) {
  return m == SearchMethod::kBisect ? "bisect" : "interp";
}

SearchMethod ParseSearchMethod(std::string_view name) {
  if (name == "bisect") return SearchMethod::kBisect;
  if (name == "interp" || name == "interpolate") return SearchMethod::kInterpolate;
  throw InvalidArgument("unknown search method '" + std::string(name) +
                        "' (bisect|interp)");
}

bool MetricSpan::Admits(const QualityTarget& target) const {
  return target.value >= low - target.tolerance &&
         target.value <= high + target.tolerance;
}

InfeasibleTarget::InfeasibleTarget(const QualityTarget& target,
                                   const MetricSpan& span)
    : Error("target " + FormatValue(target.value) + " for metric '" +
            target.metric_id + "' is outside the achievable interval [" +
            FormatValue(span.low) + ", " + FormatValue(span.high) + "]"),
      span_(span),
      target_(target.value) {}

SearchProblem MakeProblem(const RasterImage& image, const Codec& codec,
                          const Metric& metric, const ParameterRange& range) {
  const ParamKind own = codec.descriptor().param_kind;
  if (!(range.kind == own || (IsStepKind(range.kind) && IsStepKind(own)))) {
    throw InvalidArgument("range kind " + std::string(ParamKindName(range.kind)) +
                          " does not match codec '" + codec.id() + "' (" +
                          std::string(ParamKindName(own)) + ")");
  }
  range.Validate();
  if (!metric.evaluate) throw InvalidArgument("metric has no evaluator");
  SearchProblem problem;
  problem.original = &image;
  problem.metric = metric.descriptor;
  problem.direction = codec.descriptor().quality_direction;
  problem.range = range;
  problem.probe = [&image, &codec, eval = metric.evaluate,
                   kind = range.kind](double p) {
    ProbeOutcome out;
    out.blob = codec.Compress(image, {kind, p});
    out.value = eval(image, codec.Decompress(out.blob));
    return out;
  };
  return problem;
}

MetricSpan EstimateRange(const RasterImage& image, const Codec& codec,
                         const Metric& metric, const ParameterRange& range) {
  const SearchProblem problem = MakeProblem(image, codec, metric, range);
  const double a = problem.probe(range.min).value;
  const double b = problem.probe(range.max).value;
  MetricSpan span;
  span.at_min = {metric.descriptor.id, a};
  span.at_max = {metric.descriptor.id, b};
  span.low = std::min(a, b);
  span.high = std::max(a, b);
  return span;
}

SearchResult BisectionSearch(const SearchProblem& problem,
                             const QualityTarget& target,
                             const SearchOptions& options) {
  Run run(problem, target, options);
  if (auto done = run.Start()) return *std::move(done);
  const int max_iters = run.MaxIters(kBisectMaxIters);
  for (int i = 0; i < max_iters && !run.Resolved(); ++i) {
    if (run.Measure(run.Mid())) return run.Converged();
  }
  return run.Exhausted();
}

SearchResult InterpolationSearch(const SearchProblem& problem,
                                 const QualityTarget& target,
                                 const SearchOptions& options) {
  Run run(problem, target, options);
  const ParameterRange& r = problem.range;
  const double seed = options.seed.value_or(std::sqrt(r.min * r.max));
  if (!r.Contains(seed)) {
    throw InvalidArgument("seed " + FormatValue(seed) + " outside the range");
  }
  if (auto done = run.Start()) return *std::move(done);
  const int max_iters = run.MaxIters(kInterpMaxIters);
  int outside = 0;
  for (int i = 0; i < max_iters && !run.Resolved(); ++i) {
    double p = 0.0;
    const auto& h = run.history();
    if (h.empty()) {
      p = run.Inside(seed) ? seed : run.Mid();
    } else if (h.size() == 1) {
      // Step along a log-linear model with the slope of the whole span.
      const double vmin = run.span().at_min.value;
      const double vmax = run.span().at_max.value;
      const double s = (vmax - vmin) / (std::log(r.max) - std::log(r.min));
      p = s != 0 ? h[0].param * std::exp((run.target() - h[0].value) / s)
                 : run.Mid();
      if (!run.Inside(p)) p = run.Mid();
    } else {
      const Probe& a = h[h.size() - 2];
      const Probe& b = h.back();
      if (a.value == b.value || a.param == b.param) {
        p = run.Mid();
      } else {
        p = b.param + (run.target() - b.value) * (b.param - a.param) /
                          (b.value - a.value);
        if (run.Inside(p)) {
          outside = 0;
        } else if (++outside >= 2) {
          p = run.Mid();
          outside = 0;
        } else {
          const double w = run.hi() - run.lo();
          p = p <= run.lo() ? run.lo() + kInsideMargin * w
                            : run.hi() - kInsideMargin * w;
        }
      }
    }
    if (run.Measure(p)) return run.Converged();
  }
  return run.Exhausted();
}

SearchResult RunSearch(SearchMethod method, const SearchProblem& problem,
                       const QualityTarget& target, const SearchOptions& options) {
  return method == SearchMethod::kBisect
             ? BisectionSearch(problem, target, options)
             : InterpolationSearch(problem, target, options);
}

SearchResult RunSearch(SearchMethod method, const RasterImage& image,
                       const Codec& codec, const Metric& metric,
                       const QualityTarget& target, const ParameterRange& range,
                       const SearchOptions& options) {
  return RunSearch(method, MakeProblem(image, codec, metric, range), target,
                   options);
}

}  // namespace qpress
