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

// Shared fixtures for unit and acceptance tests.

#ifndef QPRESS_TESTS_TEST_SUPPORT_HPP_
#define QPRESS_TESTS_TEST_SUPPORT_HPP_

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qpress/image.hpp"

namespace qpress::testing {

#ifndef QPRESS_TEST_DATA_DIR
#error "QPRESS_TEST_DATA_DIR must be defined"
#endif

inline std::filesystem::path DataPath(const std::string& name) {
  return std::filesystem::path(QPRESS_TEST_DATA_DIR) / name;
}

inline RasterImage LoadData(const std::string& name) {
  return LoadPgm(ReadFile(DataPath(name)));
}

inline const std::vector<std::string>& NaturalImages() {
  static const std::vector<std::string> names = {"camera.pgm", "moon.pgm",
                                                 "astronaut.pgm"};
  return names;
}

inline const std::vector<std::string>& CorpusImages() {
  static const std::vector<std::string> names = {
      "camera.pgm", "moon.pgm", "astronaut.pgm", "synthetic_gradient.pgm",
      "synthetic_shapes.pgm"};
  return names;
}

// Gaussian samples from a fixed generator; std::normal_distribution is
// implementation-defined, so Box-Muller keeps the values portable.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }
  double Uniform() { return double(rng_() >> 11) * 0x1.0p-53; }
  std::uint64_t Bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline RasterImage AddNoise(const RasterImage& img, double sigma, std::uint64_t seed) {
  Gaussian g(seed);
  std::vector<std::uint16_t> out(img.pixel_count());
  const auto s = img.samples();
  const double top = img.max_value();
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = static_cast<std::uint16_t>(
        std::clamp(std::round(s[i] + sigma * g()), 0.0, top));
  }
  return RasterImage(img.width(), img.height(), img.bit_depth(), std::move(out));
}

inline RasterImage RandomImage(int w, int h, int bit_depth, std::uint64_t seed) {
  Gaussian g(seed);
  const std::uint64_t mod = std::uint64_t{1} << bit_depth;
  std::vector<std::uint16_t> s(std::size_t(w) * h);
  for (auto& v : s) v = static_cast<std::uint16_t>(g.Bits() % mod);
  return RasterImage(w, h, bit_depth, std::move(s));
}

// Crop of the top-left corner, to keep slow tests small.
inline RasterImage Crop(const RasterImage& img, int w, int h) {
  std::vector<std::uint16_t> s;
  s.reserve(std::size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) s.push_back(img.at(x, y));
  return RasterImage(w, h, img.bit_depth(), std::move(s));
}

inline int MaxAbsDiff(const RasterImage& a, const RasterImage& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    m = std::max(m, std::abs(int(a.samples()[i]) - int(b.samples()[i])));
  }
  return m;
}

// Ten 16-bit bands: smooth gradients, ripples and fine texture plus sensor
// noise, each band with its own offset and dynamic range (20k to 60k peak).
inline SpectralCube SyntheticCube(int bands = 10, int size = 256,
                                  std::uint64_t seed = 2013) {
  Gaussian g(seed);
  std::vector<RasterImage> out;
  std::vector<std::string> labels;
  for (int b = 0; b < bands; ++b) {
    const double peak = 20000.0 + 40000.0 * double(b) / std::max(bands - 1, 1);
    const double offset = 0.05 * peak;
    const double amp = 0.9 * peak - offset;
    const double fx = 1.5 + 0.37 * b;
    const double fy = 2.0 + 0.21 * b;
    const double sigma = 0.015 * peak;
    std::vector<std::uint16_t> s(std::size_t(size) * size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double u = double(x) / (size - 1);
        const double v = double(y) / (size - 1);
        const double pi2 = 2 * std::numbers::pi;
        double t = 0.35 * (0.6 * u + 0.4 * v) +
                   0.25 * (0.5 + 0.5 * std::sin(pi2 * fx * u + b)) *
                       (0.5 + 0.5 * std::cos(pi2 * fy * v)) +
                   0.2 * std::exp(-((u - 0.3) * (u - 0.3) + (v - 0.6) * (v - 0.6)) * 12.0) +
                   0.2 * (0.5 + 0.5 * std::sin(pi2 * (17 + b) * u) * std::sin(pi2 * 23 * v));
        const double val = offset + amp * t + sigma * g();
        s[std::size_t(y) * size + x] =
            static_cast<std::uint16_t>(std::clamp(std::round(val), 0.0, 65535.0));
      }
    }
    out.emplace_back(size, size, 16, std::move(s));
    labels.push_back("band" + std::to_string(b));
  }
  return SpectralCube(std::move(out), std::move(labels));
}

// Temporary directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "qpress-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

inline CommandResult RunCommand(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

#ifdef QPRESS_BIN
inline CommandResult RunCli(const std::string& args) {
  return RunCommand(Quote(QPRESS_BIN) + " " + args);
}
#endif

}  // namespace qpress::testing

#endif  // QPRESS_TESTS_TEST_SUPPORT_HPP_
