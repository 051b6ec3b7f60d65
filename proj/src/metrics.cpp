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

#include "qpress/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <utility>

#include "qpress/error.hpp"

namespace qpress {

// Contrast sensitivity and masking coefficients of PSNR-HVS / PSNR-HVS-M,
// as published with the reference MATLAB implementation (psnrhvsm.m).
// kHvsMask[k][l] == (kHvsCsf[k][l] / max(kHvsCsf))^2 to six decimals.
const std::array<std::array<double, 8>, 8> kHvsCsf = {{
    {1.608443, 2.339554, 2.573509, 1.608443, 1.072295, 0.643377, 0.504610, 0.421887},
    {2.144591, 2.144591, 1.838221, 1.354478, 0.989811, 0.443708, 0.428918, 0.467911},
    {1.838221, 1.979622, 1.608443, 1.072295, 0.643377, 0.451493, 0.372972, 0.459555},
    {1.838221, 1.513829, 1.169777, 0.887417, 0.504610, 0.295806, 0.321689, 0.415082},
    {1.429727, 1.169777, 0.695543, 0.459555, 0.378457, 0.236102, 0.249855, 0.334222},
    {1.072295, 0.735288, 0.467911, 0.402111, 0.317717, 0.247453, 0.227744, 0.279729},
    {0.525206, 0.402111, 0.329937, 0.295806, 0.249855, 0.212687, 0.214459, 0.254803},
    {0.357432, 0.279729, 0.270896, 0.262603, 0.229778, 0.257351, 0.249855, 0.259950},
}};

const std::array<std::array<double, 8>, 8> kHvsMask = {{
    {0.390625, 0.826446, 1.000000, 0.390625, 0.173611, 0.062500, 0.038447, 0.026874},
    {0.694444, 0.694444, 0.510204, 0.277008, 0.147929, 0.029727, 0.027778, 0.033058},
    {0.510204, 0.591716, 0.390625, 0.173611, 0.062500, 0.030779, 0.021004, 0.031888},
    {0.510204, 0.346021, 0.206612, 0.118906, 0.038447, 0.013212, 0.015625, 0.026015},
    {0.308642, 0.206612, 0.073046, 0.031888, 0.021626, 0.008417, 0.009426, 0.016866},
    {0.173611, 0.081633, 0.033058, 0.024414, 0.015242, 0.009246, 0.007831, 0.011815},
    {0.041649, 0.024414, 0.016437, 0.013212, 0.009426, 0.006830, 0.006944, 0.009803},
    {0.019290, 0.011815, 0.011080, 0.010412, 0.007972, 0.010000, 0.009426, 0.010203},
}};

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

// WSNR CSF parameters: Nyquist frequency in cycles/degree and the
// diagonal-attenuation symmetry parameter.
constexpr double kWsnrNyquistCpd = 60.0;
constexpr double kWsnrSymmetry = 0.7;

void CheckPair(const RasterImage& ref, const RasterImage& dist) {
  if (ref.empty() || dist.empty()) throw InvalidArgument("empty image");
  if (!ref.same_shape(dist)) {
    throw InvalidArgument("image dimension/depth mismatch: " +
                          std::to_string(ref.width()) + "x" +
                          std::to_string(ref.height()) + "@" +
                          std::to_string(ref.bit_depth()) + " vs " +
                          std::to_string(dist.width()) + "x" +
                          std::to_string(dist.height()) + "@" +
                          std::to_string(dist.bit_depth()));
  }
}

double ToDecibels(double peak_sq, double error) {
  if (error <= 0.0) return kDecibelCap;
  return std::clamp(10.0 * std::log10(peak_sq / error), 0.0, kDecibelCap);
}

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), v(std::size_t(width) * height) {}
  explicit Plane(const RasterImage& img)
      : w(img.width()), h(img.height()), v(img.samples().begin(), img.samples().end()) {}

  double& operator()(int x, int y) { return v[std::size_t(y) * w + x]; }
  double operator()(int x, int y) const { return v[std::size_t(y) * w + x]; }
};

std::array<double, kSsimWindow> GaussianTaps() {
  std::array<double, kSsimWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& t : g) t /= sum;
  return g;
}

// Separable Gaussian correlation keeping only fully covered positions.
Plane FilterValid(const Plane& in) {
  static const auto taps = GaussianTaps();
  const int ow = in.w - kSsimWindow + 1;
  const int oh = in.h - kSsimWindow + 1;
  Plane rows(ow, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) acc += taps[k] * in(x + k, y);
      rows(x, y) = acc;
    }
  }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) acc += taps[k] * rows(x, y + k);
      out(x, y) = acc;
    }
  }
  return out;
}

struct SsimStats {
  double ssim = 0.0;  // mean of luminance x contrast-structure
  double cs = 0.0;    // mean of contrast-structure only
};

SsimStats SsimPlanes(const Plane& a, const Plane& b, double dynamic_range) {
  if (a.w < kSsimWindow || a.h < kSsimWindow) {
    throw InvalidArgument("image smaller than the 11x11 SSIM window");
  }
  const double c1 = (kSsimK1 * dynamic_range) * (kSsimK1 * dynamic_range);
  const double c2 = (kSsimK2 * dynamic_range) * (kSsimK2 * dynamic_range);

  Plane aa(a.w, a.h), bb(a.w, a.h), ab(a.w, a.h);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const Plane mu_a = FilterValid(a);
  const Plane mu_b = FilterValid(b);
  const Plane e_aa = FilterValid(aa);
  const Plane e_bb = FilterValid(bb);
  const Plane e_ab = FilterValid(ab);

  double sum_ssim = 0.0;
  double sum_cs = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i];
    const double mb = mu_b.v[i];
    const double var_a = e_aa.v[i] - ma * ma;
    const double var_b = e_bb.v[i] - mb * mb;
    const double cov = e_ab.v[i] - ma * mb;
    const double cs = (2.0 * cov + c2) / (var_a + var_b + c2);
    const double lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    sum_ssim += lum * cs;
    sum_cs += cs;
  }
  const double n = static_cast<double>(mu_a.v.size());
  return {sum_ssim / n, sum_cs / n};
}

// 2x2 box average followed by decimation; odd edges mirror the last sample.
Plane Downsample(const Plane& in) {
  Plane out((in.w + 1) / 2, (in.h + 1) / 2);
  for (int y = 0; y < out.h; ++y) {
    const int y0 = 2 * y;
    const int y1 = std::min(2 * y + 1, in.h - 1);
    for (int x = 0; x < out.w; ++x) {
      const int x0 = 2 * x;
      const int x1 = std::min(2 * x + 1, in.w - 1);
      out(x, y) = 0.25 * (in(x0, y0) + in(x1, y0) + in(x0, y1) + in(x1, y1));
    }
  }
  return out;
}

// Orthonormal 8-point DCT-II basis, row k = frequency.
const std::array<std::array<double, 8>, 8>& Dct8Basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> m{};
    for (int k = 0; k < 8; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) {
        m[k][n] = scale * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
      }
    }
    return m;
  }();
  return basis;
}

using Block8 = std::array<std::array<double, 8>, 8>;

Block8 Dct8x8(const Block8& in) {
  const auto& c = Dct8Basis();
  Block8 tmp{};
  for (int y = 0; y < 8; ++y) {
    for (int k = 0; k < 8; ++k) {
      double acc = 0.0;
      for (int n = 0; n < 8; ++n) acc += c[k][n] * in[y][n];
      tmp[y][k] = acc;
    }
  }
  Block8 out{};
  for (int k = 0; k < 8; ++k) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int n = 0; n < 8; ++n) acc += c[k][n] * tmp[n][x];
      out[k][x] = acc;
    }
  }
  return out;
}

// Sum of squared deviations scaled by N/(N-1), i.e. sample variance times N.
double ScaledVariance(const Block8& b, int y0, int x0, int size) {
  double mean = 0.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) mean += b[y0 + y][x0 + x];
  const double n = static_cast<double>(size * size);
  mean /= n;
  double ss = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d = b[y0 + y][x0 + x] - mean;
      ss += d * d;
    }
  }
  return ss / (n - 1.0) * n;
}

// Contrast-masking allowance of one 8x8 block.
double MaskingEnergy(const Block8& pixels, const Block8& dct) {
  double m = 0.0;
  for (int k = 0; k < 8; ++k) {
    for (int l = 0; l < 8; ++l) {
      if (k != 0 || l != 0) m += dct[k][l] * dct[k][l] * kHvsMask[k][l];
    }
  }
  double pop = ScaledVariance(pixels, 0, 0, 8);
  if (pop != 0.0) {
    pop = (ScaledVariance(pixels, 0, 0, 4) + ScaledVariance(pixels, 0, 4, 4) +
           ScaledVariance(pixels, 4, 4, 4) + ScaledVariance(pixels, 4, 0, 4)) /
          pop;
  }
  return std::sqrt(m * pop) / 32.0;
}

std::mutex& FftwPlannerMutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

double Psnr(const RasterImage& ref, const RasterImage& dist) {
  CheckPair(ref, dist);
  std::uint64_t sse = 0;
  const auto a = ref.samples();
  const auto b = dist.samples();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t d = std::int64_t{a[i]} - std::int64_t{b[i]};
    sse += static_cast<std::uint64_t>(d * d);
  }
  const double peak = ref.max_value();
  const double mse = static_cast<double>(sse) / static_cast<double>(a.size());
  return ToDecibels(peak * peak, mse);
}

double Ssim(const RasterImage& ref, const RasterImage& dist) {
  CheckPair(ref, dist);
  return SsimPlanes(Plane(ref), Plane(dist), ref.max_value()).ssim;
}

double Msssim(const RasterImage& ref, const RasterImage& dist) {
  CheckPair(ref, dist);
  int min_side = std::min(ref.width(), ref.height());
  if (min_side < kSsimWindow) {
    throw InvalidArgument("image smaller than the 11x11 SSIM window");
  }
  int scales = 1;
  for (int side = min_side; scales < static_cast<int>(kMsssimWeights.size());) {
    side = (side + 1) / 2;
    if (side < kSsimWindow) break;
    ++scales;
  }
  double weight_sum = 0.0;
  for (int i = 0; i < scales; ++i) weight_sum += kMsssimWeights[i];

  Plane a(ref);
  Plane b(dist);
  double result = 1.0;
  for (int level = 0; level < scales; ++level) {
    const SsimStats s = SsimPlanes(a, b, ref.max_value());
    const double w = kMsssimWeights[level] / weight_sum;
    // Negative structure terms would make the fractional power undefined.
    const double term = level + 1 == scales ? s.ssim : s.cs;
    result *= std::pow(std::max(term, 0.0), w);
    if (level + 1 < scales) {
      a = Downsample(a);
      b = Downsample(b);
    }
  }
  return result;
}

double Wsnr(const RasterImage& ref, const RasterImage& dist) {
  CheckPair(ref, dist);
  const int w = ref.width();
  const int h = ref.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const auto a = ref.samples();
  const auto b = dist.samples();

  bool identical = true;
  double signal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    identical &= a[i] == b[i];
    signal += double(a[i]) * double(a[i]);
  }
  if (identical) return kDecibelCap;
  // Parseval: the DFT-domain signal energy is n times the spatial one.
  signal *= static_cast<double>(n);

  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (buf == nullptr) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(FftwPlannerMutex());
    plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = double(a[i]) - double(b[i]);
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);

  // The CSF is laid out on the centred (fftshift-ed) grid with sample
  // positions -n/2 + 0.5 ... n/2 - 0.5; unshifted index k sits at centred
  // index (k + n/2) mod n.
  auto axis_freq = [](int centred, int size) {
    return (-size / 2.0 + 0.5 + centred) / size * 2.0 * kWsnrNyquistCpd;
  };
  double noise = 0.0;
  for (int ky = 0; ky < h; ++ky) {
    const double fy = axis_freq((ky + h / 2) % h, h);
    for (int kx = 0; kx < w; ++kx) {
      const double fx = axis_freq((kx + w / 2) % w, w);
      const double angle = std::atan2(fy, fx);
      const double s = (1.0 - kWsnrSymmetry) / 2.0 * std::cos(4.0 * angle) +
                       (1.0 + kWsnrSymmetry) / 2.0;
      const double f = std::hypot(fx, fy) / s;
      const double csf =
          f < 7.8909 ? 0.9809
                     : 2.6 * (0.0192 + 0.114 * f) * std::exp(-std::pow(0.114 * f, 1.1));
      const fftw_complex& c = buf[std::size_t(ky) * w + kx];
      noise += (c[0] * c[0] + c[1] * c[1]) * csf * csf;
    }
  }
  {
    std::lock_guard lock(FftwPlannerMutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return ToDecibels(signal, noise);
}

HvsPair PsnrHvsBoth(const RasterImage& ref, const RasterImage& dist) {
  CheckPair(ref, dist);
  if (ref.width() < 8 || ref.height() < 8) {
    throw InvalidArgument("PSNR-HVS needs images of at least 8x8");
  }
  double s_hvs = 0.0;
  double s_hvs_m = 0.0;
  std::size_t count = 0;
  Block8 pa{}, pb{};
  for (int y0 = 0; y0 + 8 <= ref.height(); y0 += 8) {
    for (int x0 = 0; x0 + 8 <= ref.width(); x0 += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          pa[y][x] = ref.at(x0 + x, y0 + y);
          pb[y][x] = dist.at(x0 + x, y0 + y);
        }
      }
      const Block8 da = Dct8x8(pa);
      const Block8 db = Dct8x8(pb);
      const double mask = std::max(MaskingEnergy(pa, da), MaskingEnergy(pb, db));
      for (int k = 0; k < 8; ++k) {
        for (int l = 0; l < 8; ++l) {
          double u = std::abs(da[k][l] - db[k][l]);
          s_hvs += (u * kHvsCsf[k][l]) * (u * kHvsCsf[k][l]);
          if (k != 0 || l != 0) {
            const double allowance = mask / kHvsMask[k][l];
            u = u < allowance ? 0.0 : u - allowance;
          }
          s_hvs_m += (u * kHvsCsf[k][l]) * (u * kHvsCsf[k][l]);
          ++count;
        }
      }
    }
  }
  const double peak = ref.max_value();
  return {ToDecibels(peak * peak, s_hvs / count),
          ToDecibels(peak * peak, s_hvs_m / count)};
}

double PsnrHvs(const RasterImage& ref, const RasterImage& dist) {
  return PsnrHvsBoth(ref, dist).psnr_hvs;
}

double PsnrHvsM(const RasterImage& ref, const RasterImage& dist) {
  return PsnrHvsBoth(ref, dist).psnr_hvs_m;
}

MetricRegistry MetricRegistry::WithBuiltins() {
  MetricRegistry r;
  auto db = [](std::string id, MetricFn fn) {
    return Metric{{std::move(id), MetricUnits::kDecibels, 0.0, kDecibelCap, true},
                  std::move(fn)};
  };
  auto unitless = [](std::string id, MetricFn fn) {
    return Metric{{std::move(id), MetricUnits::kUnitless, 0.0, 1.0, true},
                  std::move(fn)};
  };
  r.Add(db("psnr", Psnr));
  r.Add(unitless("ssim", Ssim));
  r.Add(unitless("msssim", Msssim));
  r.Add(db("wsnr", Wsnr));
  r.Add(db("psnr_hvs", PsnrHvs));
  r.Add(db("psnr_hvs_m", PsnrHvsM));
  return r;
}

void MetricRegistry::Add(Metric metric) {
  if (metric.descriptor.id.empty() || !metric.evaluate) {
    throw InvalidArgument("metric needs an id and an evaluator");
  }
  std::string id = metric.descriptor.id;
  metrics_.insert_or_assign(std::move(id), std::move(metric));
}

const Metric& MetricRegistry::Get(std::string_view id) const {
  const auto it = metrics_.find(id);
  if (it == metrics_.end()) {
    throw InvalidArgument("unknown metric id '" + std::string(id) + "'");
  }
  return it->second;
}

bool MetricRegistry::Contains(std::string_view id) const {
  return metrics_.find(id) != metrics_.end();
}

std::vector<std::string> MetricRegistry::Ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, m] : metrics_) ids.push_back(id);
  return ids;
}

const MetricRegistry& BuiltinMetrics() {
  static const MetricRegistry registry = MetricRegistry::WithBuiltins();
  return registry;
}

}  // namespace qpress
