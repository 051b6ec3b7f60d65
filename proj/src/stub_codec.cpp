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

#include "qpress/stub_codec.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <thread>

#include "qpress/error.hpp"

namespace qpress {

namespace {

constexpr int kMonotoneGrid = 1024;
constexpr std::size_t kParamBytes = 8;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double ParseNumber(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument("bad number '" + std::string(s) + "' in stub profile");
  }
  return v;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::pair<double, double> ParsePair(std::string_view s) {
  const auto parts = Split(s, ',');
  if (parts.size() != 2) {
    throw InvalidArgument("expected two comma-separated numbers, got '" +
                          std::string(s) + "'");
  }
  return {ParseNumber(parts[0]), ParseNumber(parts[1])};
}

}  // namespace

ResponseProfile::ResponseProfile(std::function<double(double)> fn, double lo,
                                 double hi)
    : fn_(std::move(fn)), lo_(lo), hi_(hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw InvalidArgument("stub profile domain must satisfy lo < hi");
  }
}

void ResponseProfile::CheckMonotone() {
  double prev = fn_(lo_);
  int sign = 0;
  for (int i = 1; i <= kMonotoneGrid; ++i) {
    const double p = i == kMonotoneGrid
                         ? hi_
                         : lo_ + (hi_ - lo_) * i / double(kMonotoneGrid);
    const double v = fn_(p);
    if (!std::isfinite(v)) throw InvalidArgument("stub profile is not finite");
    const int s = v > prev ? 1 : (v < prev ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw InvalidArgument("stub profile is not strictly monotone");
    }
    sign = s;
    prev = v;
  }
  orientation_ = sign;
}

ResponseProfile ResponseProfile::Affine(double intercept, double slope,
                                        double lo, double hi) {
  ResponseProfile p([=](double x) { return intercept + slope * x; }, lo, hi);
  p.CheckMonotone();
  return p;
}

ResponseProfile ResponseProfile::Log2(double intercept, double slope, double lo,
                                      double hi) {
  if (!(lo > 0)) throw InvalidArgument("log2 stub profile needs lo > 0");
  ResponseProfile p([=](double x) { return intercept + slope * std::log2(x); },
                    lo, hi);
  p.CheckMonotone();
  return p;
}

ResponseProfile ResponseProfile::Tabulated(
    std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw InvalidArgument("tabulated stub profile needs at least two points");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first)) {
      throw InvalidArgument("tabulated stub profile params must increase");
    }
  }
  const double lo = points.front().first;
  const double hi = points.back().first;
  ResponseProfile p(
      [pts = std::move(points)](double x) {
        auto it = std::upper_bound(
            pts.begin(), pts.end(), x,
            [](double v, const std::pair<double, double>& e) { return v < e.first; });
        if (it == pts.begin()) return pts.front().second;
        if (it == pts.end()) return pts.back().second;
        const auto& a = *(it - 1);
        const auto& b = *it;
        const double t = (x - a.first) / (b.first - a.first);
        return a.second + t * (b.second - a.second);
      },
      lo, hi);
  // Piecewise-linear: strict monotonicity of the knots is sufficient.
  p.CheckMonotone();
  return p;
}

ResponseProfile ResponseProfile::Parse(std::string_view text) {
  double noise = 0.0;
  if (const auto tilde = text.find('~'); tilde != std::string_view::npos) {
    noise = ParseNumber(text.substr(tilde + 1));
    text = text.substr(0, tilde);
  }
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("stub profile must look like kind:args");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view args = text.substr(colon + 1);
  ResponseProfile out = [&] {
    if (kind == "affine" || kind == "log2") {
      const auto at = args.find('@');
      if (at == std::string_view::npos) {
        throw InvalidArgument("stub profile '" + std::string(kind) +
                              "' needs a domain: <a>,<b>@<lo>,<hi>");
      }
      const auto [a, b] = ParsePair(args.substr(0, at));
      const auto [lo, hi] = ParsePair(args.substr(at + 1));
      return kind == "affine" ? Affine(a, b, lo, hi) : Log2(a, b, lo, hi);
    }
    if (kind == "table") {
      std::vector<std::pair<double, double>> pts;
      for (std::string_view item : Split(args, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
          throw InvalidArgument("table stub profile entries are <p>=<m>");
        }
        pts.emplace_back(ParseNumber(item.substr(0, eq)),
                         ParseNumber(item.substr(eq + 1)));
      }
      return Tabulated(std::move(pts));
    }
    throw InvalidArgument("unknown stub profile kind '" + std::string(kind) + "'");
  }();
  return noise > 0 ? out.WithNoise(noise) : out;
}

ResponseProfile ResponseProfile::WithNoise(double amplitude,
                                           std::uint64_t seed) const {
  if (!(amplitude >= 0 && std::isfinite(amplitude))) {
    throw InvalidArgument("noise amplitude must be finite and >= 0");
  }
  ResponseProfile p(
      [base = fn_, amplitude, seed](double x) {
        const std::uint64_t h = SplitMix64(std::bit_cast<std::uint64_t>(x) ^ seed);
        const double u = double(h >> 11) * 0x1.0p-53;  // [0, 1)
        return base(x) + amplitude * (2.0 * u - 1.0);
      },
      lo_, hi_);
  // Noise may break strict monotonicity locally; keep the base orientation.
  p.orientation_ = orientation_;
  return p;
}

double ResponseProfile::operator()(double param) const {
  if (!(param >= lo_ && param <= hi_)) {
    throw InvalidArgument("stub profile evaluated outside its domain");
  }
  return fn_(param);
}

StubCodec::StubCodec(ResponseProfile profile, StubOptions options)
    : profile_(std::move(profile)), options_(std::move(options)) {
  if (options_.codec_id.empty() || options_.codec_id.size() > 255) {
    throw InvalidArgument("stub codec id must be 1..255 characters");
  }
  const QualityDirection direction =
      profile_.orientation() < 0 ? QualityDirection::kMetricDecreasesWithParam
                                 : QualityDirection::kMetricIncreasesWithParam;
  if (direction != DirectionForKind(options_.param_kind)) {
    throw InvalidArgument(
        "stub profile orientation contradicts parameter kind " +
        std::string(ParamKindName(options_.param_kind)));
  }
  descriptor_.codec_id = options_.codec_id;
  descriptor_.param_kind = options_.param_kind;
  descriptor_.default_range = {options_.param_kind, profile_.domain_min(),
                               profile_.domain_max()};
  descriptor_.default_range.Validate();
  descriptor_.quality_direction = direction;
  // bpp-driven stubs without an explicit length get p * pixels / 8 bytes,
  // computed in Compress where the pixel count is known.
  if (!options_.payload_length && options_.param_kind != ParamKind::kBitsPerPixel) {
    options_.payload_length = [](std::size_t raw, double p) {
      return static_cast<std::size_t>(std::ceil(double(raw) / p));
    };
  }
}

CompressedBlob StubCodec::Compress(const RasterImage& image,
                                   ControlParameter param) const {
  CheckParamKind(param);
  profile_(param.value);  // domain check
  if (image.pixel_count() < kParamBytes) {
    throw InvalidArgument("stub codec needs at least 8 pixels");
  }
  if (options_.delay.count() > 0) std::this_thread::sleep_for(options_.delay);

  std::size_t len =
      options_.payload_length
          ? options_.payload_length(image.raw_bytes(), param.value)
          : static_cast<std::size_t>(
                std::ceil(param.value * double(image.pixel_count()) / 8.0));
  len = std::max(len, kParamBytes);

  CompressedBlob blob;
  blob.codec_id = descriptor_.codec_id;
  blob.param = {descriptor_.param_kind, param.value};
  blob.width = image.width();
  blob.height = image.height();
  blob.bit_depth = image.bit_depth();
  blob.backend = EntropyBackend::kNone;
  blob.payload.assign(len, 0);
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(param.value);
  for (std::size_t i = 0; i < kParamBytes; ++i) {
    blob.payload[i] = static_cast<std::uint8_t>(bits >> (8 * i));
  }
  return blob;
}

RasterImage StubCodec::Decompress(const CompressedBlob& blob) const {
  if (blob.codec_id != descriptor_.codec_id) {
    throw CodecError("blob codec '" + blob.codec_id + "' is not '" +
                     descriptor_.codec_id + "'");
  }
  if (blob.payload.size() < kParamBytes) {
    throw CodecError("corrupt payload: stub payload shorter than 8 bytes");
  }
  const std::size_t pixels = std::size_t(blob.width) * std::size_t(blob.height);
  if (pixels < kParamBytes || pixels > (std::size_t{1} << 28)) {
    throw CodecError("corrupt payload: bad stub geometry");
  }
  std::vector<std::uint16_t> samples(pixels, 0);
  for (std::size_t i = 0; i < kParamBytes; ++i) samples[i] = blob.payload[i];
  return RasterImage(blob.width, blob.height, blob.bit_depth, std::move(samples));
}

Metric StubCodec::DesignatedMetric() const {
  Metric m;
  if (BuiltinMetrics().Contains(options_.designated_metric)) {
    m.descriptor = BuiltinMetrics().Get(options_.designated_metric).descriptor;
  } else {
    m.descriptor.id = options_.designated_metric;
  }
  m.evaluate = [profile = profile_](const RasterImage&, const RasterImage& dist) {
    const auto s = dist.samples();
    if (s.size() < kParamBytes) throw InvalidArgument("not a stub image");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < kParamBytes; ++i) {
      bits |= std::uint64_t(s[i] & 0xFF) << (8 * i);
    }
    return profile(std::bit_cast<double>(bits));
  };
  return m;
}

std::optional<Metric> StubCodec::MetricOverride(std::string_view metric_id) const {
  if (metric_id != options_.designated_metric) return std::nullopt;
  return DesignatedMetric();
}

}  // namespace qpress
