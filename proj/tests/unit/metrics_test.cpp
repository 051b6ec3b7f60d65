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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "json.hpp"
#include "qpress/error.hpp"
#include "qpress/metrics.hpp"
#include "test_support.hpp"

namespace qpress {
namespace {

// Independent oracle: long double sum of squared differences.
double BruteForcePsnr(const RasterImage& a, const RasterImage& b) {
  long double sum = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const long double d = (long double)a.at(x, y) - (long double)b.at(x, y);
      sum += d * d;
    }
  }
  if (sum == 0) return 100.0;
  const long double mse = sum / ((long double)a.width() * a.height());
  const long double peak = a.max_value();
  return double(10.0L * std::log10(peak * peak / mse));
}

RasterImage Const(int v, int depth = 8, int size = 32) {
  return RasterImage::Filled(size, size, depth, static_cast<std::uint16_t>(v));
}

TEST_SUITE("metrics") {

TEST_CASE("registry descriptors") {
  const MetricRegistry& r = BuiltinMetrics();
  CHECK(r.Ids() == std::vector<std::string>{"msssim", "psnr", "psnr_hvs", "psnr_hvs_m",
                                            "ssim", "wsnr"});
  CHECK(r.Get("psnr").descriptor.units == MetricUnits::kDecibels);
  CHECK(r.Get("psnr").descriptor.higher_is_better);
  CHECK(r.Get("msssim").descriptor.units == MetricUnits::kUnitless);
  CHECK(r.Get("msssim").descriptor.range_min == 0.0);
  CHECK(r.Get("msssim").descriptor.range_max == 1.0);
  CHECK_THROWS_AS(r.Get("vif"), InvalidArgument);
  MetricRegistry custom = MetricRegistry::WithBuiltins();
  custom.Add({{"mad", MetricUnits::kUnitless, 0, 1, true},
              [](const RasterImage&, const RasterImage&) { return 0.5; }});
  CHECK(custom.Contains("mad"));
}

TEST_CASE("psnr closed forms") {
  CHECK(Psnr(Const(0), Const(1)) == doctest::Approx(20 * std::log10(255.0)).epsilon(1e-12));
  CHECK(Psnr(Const(0), Const(1)) == doctest::Approx(48.1308).epsilon(1e-6));
  CHECK(Psnr(Const(0), Const(255)) == 0.0);
  CHECK(Psnr(Const(7), Const(7)) == 100.0);
}

TEST_CASE("psnr matches the brute-force oracle on random pairs") {
  testing::Gaussian g(77);
  for (int i = 0; i < 100; ++i) {
    const int depth = i % 2 ? 16 : 8;
    const int w = 1 + int(g.Bits() % 64);
    const int h = 1 + int(g.Bits() % 64);
    const RasterImage a = testing::RandomImage(w, h, depth, 1000 + i);
    const RasterImage b = i % 3 == 0 ? testing::AddNoise(a, 1 + i, 7 + i)
                                     : testing::RandomImage(w, h, depth, 5000 + i);
    CHECK(std::abs(Psnr(a, b) - BruteForcePsnr(a, b)) <= 1e-9);
  }
}

TEST_CASE("ssim closed form for constant images") {
  const double c1 = (0.01 * 255) * (0.01 * 255);
  CHECK(Ssim(Const(0), Const(255)) == doctest::Approx(c1 / (255.0 * 255.0 + c1)).epsilon(1e-9));
}

TEST_CASE("identity, symmetry, errors") {
  const RasterImage a = testing::Crop(testing::LoadData("camera.pgm"), 192, 192);
  const RasterImage b = testing::AddNoise(a, 5, 3);
  for (const std::string& id : BuiltinMetrics().Ids()) {
    const Metric& m = BuiltinMetrics().Get(id);
    CHECK_MESSAGE(m.evaluate(a, a) == m.descriptor.best_value(), id);
    CHECK_MESSAGE(m.evaluate(b, b) == m.descriptor.best_value(), id);
    CHECK_MESSAGE(m.evaluate(a, b) < m.descriptor.best_value(), id);
    CHECK_MESSAGE(m.evaluate(a, b) == m.evaluate(a, b), id);
    CHECK_THROWS_AS(m.evaluate(a, Const(0, 8, 64)), InvalidArgument);
    CHECK_THROWS_AS(m.evaluate(a, Const(0, 16, 192)), InvalidArgument);
  }
  for (const char* id : {"psnr", "ssim", "msssim"}) {
    const Metric& m = BuiltinMetrics().Get(id);
    CHECK_MESSAGE(m.evaluate(a, b) == doctest::Approx(m.evaluate(b, a)).epsilon(1e-12), id);
  }
  CHECK_THROWS_AS(Ssim(Const(0, 8, 8), Const(0, 8, 8)), InvalidArgument);
  CHECK_THROWS_AS(PsnrHvs(RasterImage::Filled(7, 20, 8, 0), RasterImage::Filled(7, 20, 8, 0)),
                  InvalidArgument);
}

TEST_CASE("every metric degrades strictly as noise variance grows") {
  const RasterImage img = testing::Crop(testing::LoadData("astronaut.pgm"), 256, 256);
  for (const std::string& id : BuiltinMetrics().Ids()) {
    const Metric& m = BuiltinMetrics().Get(id);
    double prev = m.evaluate(img, img);
    for (double var : {1.0, 4.0, 16.0, 64.0, 256.0}) {
      const double v = m.evaluate(img, testing::AddNoise(img, std::sqrt(var), 11));
      CHECK_MESSAGE(v < prev, id << " variance " << var);
      prev = v;
    }
  }
}

TEST_CASE("masking only reduces visible error") {
  for (const auto& name : testing::CorpusImages()) {
    const RasterImage img = testing::LoadData(name);
    for (double sigma : {2.0, 8.0}) {
      const HvsPair p = PsnrHvsBoth(img, testing::AddNoise(img, sigma, 5));
      CHECK_MESSAGE(p.psnr_hvs_m >= p.psnr_hvs, name);
    }
  }
}

TEST_CASE("high-frequency noise is penalized less than mid-frequency noise") {
  const RasterImage img = testing::Crop(testing::LoadData("moon.pgm"), 256, 256);
  // Checkerboard (Nyquist) versus a 16-pixel period pattern, equal energy.
  std::vector<std::uint16_t> hf(img.pixel_count()), mf(img.pixel_count());
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      const double base = img.at(x, y);
      const double n_hf = ((x + y) % 2 ? 4.0 : -4.0);
      const double n_mf = 4.0 * std::sqrt(2.0) * std::sin(2 * std::numbers::pi * x / 16.0);
      hf[y * 256 + x] = std::uint16_t(std::clamp(std::round(base + n_hf), 0.0, 255.0));
      mf[y * 256 + x] = std::uint16_t(std::clamp(std::round(base + n_mf), 0.0, 255.0));
    }
  }
  const RasterImage a(256, 256, 8, hf), b(256, 256, 8, mf);
  CHECK(Wsnr(img, a) > Wsnr(img, b));
  CHECK(PsnrHvs(img, a) >= Psnr(img, a));
  CHECK(PsnrHvs(img, a) >= Psnr(img, a) - 10.0);
}

TEST_CASE("csf and masking tables are consistent") {
  double peak = 0;
  for (const auto& row : kHvsCsf) for (double v : row) peak = std::max(peak, v);
  for (int k = 0; k < 8; ++k) {
    for (int l = 0; l < 8; ++l) {
      const double r = kHvsCsf[k][l] / peak;
      CHECK(kHvsMask[k][l] == doctest::Approx(r * r).epsilon(2e-5));
    }
  }
}

TEST_CASE("reference oracle conformance on curated pairs") {
  const auto oracle = nlohmann::json::parse(
      [] {
        const Bytes b = ReadFile(testing::DataPath("metric_oracles.json"));
        return std::string(b.begin(), b.end());
      }());
  REQUIRE(oracle["pairs"].size() == 3);
  for (const auto& pair : oracle["pairs"]) {
    const RasterImage a = testing::LoadData(pair["ref"]);
    const RasterImage b = testing::LoadData(pair["dist"]);
    const std::string name = pair["dist"];
    CHECK_MESSAGE(std::abs(Psnr(a, b) - pair["psnr"].get<double>()) <= 1e-9, name);
    CHECK_MESSAGE(std::abs(Ssim(a, b) - pair["ssim"].get<double>()) <= 1e-3, name);
    CHECK_MESSAGE(std::abs(Msssim(a, b) - pair["msssim"].get<double>()) <= 1e-3, name);
    CHECK_MESSAGE(std::abs(Wsnr(a, b) - pair["wsnr"].get<double>()) <= 0.1, name);
    const HvsPair h = PsnrHvsBoth(a, b);
    CHECK_MESSAGE(std::abs(h.psnr_hvs - pair["psnr_hvs"].get<double>()) <= 0.1, name);
    CHECK_MESSAGE(std::abs(h.psnr_hvs_m - pair["psnr_hvs_m"].get<double>()) <= 0.1, name);
  }
}

TEST_CASE("16-bit inputs use the 16-bit peak") {
  const RasterImage a = Const(0, 16);
  const RasterImage b = Const(1, 16);
  CHECK(Psnr(a, b) == doctest::Approx(20 * std::log10(65535.0)).epsilon(1e-12));
  CHECK(PsnrHvs(a, b) < 100.0);
}

TEST_CASE("msssim falls back to fewer scales on small images") {
  const RasterImage a = testing::Crop(testing::LoadData("camera.pgm"), 48, 48);
  const RasterImage b = testing::AddNoise(a, 4, 2);
  const double v = Msssim(a, b);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(Msssim(a, a) == 1.0);
}

}  // TEST_SUITE

}  // namespace
}  // namespace qpress
