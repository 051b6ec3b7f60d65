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
#include <thread>

#include "doctest.h"
#include "qpress/blob.hpp"
#include "qpress/codec.hpp"
#include "qpress/dct_codec.hpp"
#include "qpress/error.hpp"
#include "qpress/metrics.hpp"
#include "test_support.hpp"

namespace qpress {
namespace {

constexpr ControlParameter QS(double v) { return {ParamKind::kQuantizationStep, v}; }

TEST_SUITE("container") {

TEST_CASE("header layout is bit exact") {
  CompressedBlob b;
  b.codec_id = "dct";
  b.param = QS(0.5);
  b.width = 3;
  b.height = 2;
  b.bit_depth = 16;
  b.backend = EntropyBackend::kDeflate;
  b.payload = {0xAA, 0xBB};
  const Bytes s = SerializeBlob(b);
  const Bytes expected = {
      'Q', 'P', 'C', 'B', 1, 0, 3, 'd', 'c', 't', 0,
      0, 0, 0, 0, 0, 0, 0xE0, 0x3F,  // 0.5 as binary64, little-endian
      3, 0, 0, 0, 2, 0, 0, 0, 16, 1, 2, 0, 0, 0, 0xAA, 0xBB};
  CHECK(s == expected);
  CHECK(ContainerHeaderSize(b) == s.size() - 2);
  CHECK(ParseBlob(s) == b);
}

TEST_CASE("container rejects damage") {
  CompressedBlob b;
  b.codec_id = "x";
  b.width = 1;
  b.height = 1;
  b.payload = {1, 2, 3};
  Bytes s = SerializeBlob(b);
  Bytes bad_magic = s;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(ParseBlob(bad_magic), FormatError);
  Bytes bad_version = s;
  bad_version[4] = 9;
  CHECK_THROWS_AS(ParseBlob(bad_version), FormatError);
  for (std::size_t n = 0; n < s.size(); ++n) {
    CHECK_THROWS_AS(ParseBlob(std::span(s).first(n)), FormatError);
  }
  Bytes trailing = s;
  trailing.push_back(0);
  CHECK_THROWS_AS(ParseBlob(trailing), FormatError);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(QS(0).Validate(), InvalidArgument);
  CHECK_THROWS_AS(QS(-1).Validate(), InvalidArgument);
  CHECK_THROWS_AS(QS(std::nan("")).Validate(), InvalidArgument);
  CHECK_THROWS_AS((ControlParameter{ParamKind::kBitsPerPixel, 8.5}.Validate()),
                  InvalidArgument);
  CHECK_NOTHROW((ControlParameter{ParamKind::kBitsPerPixel, 8.0}.Validate()));
  CHECK_THROWS_AS((ParameterRange{ParamKind::kQuantizationStep, 5, 5}.Validate()),
                  InvalidArgument);
  CHECK(ParseParamKind(ParamKindName(ParamKind::kScalingFactor)) == ParamKind::kScalingFactor);
  CHECK(ParseParamKind("qs") == ParamKind::kQuantizationStep);
  CHECK_THROWS_AS(ParseParamKind("step"), InvalidArgument);
}

}  // TEST_SUITE

TEST_SUITE("codecs") {

TEST_CASE("registry") {
  const CodecRegistry r = CodecRegistry::WithBuiltins();
  CHECK(r.Ids() == std::vector<std::string>{"dct", "dct-m"});
  CHECK_THROWS_AS(r.Get("jpeg"), InvalidArgument);
  const auto& d = r.Get("dct")->descriptor();
  CHECK(d.param_kind == ParamKind::kQuantizationStep);
  CHECK(d.quality_direction == QualityDirection::kMetricDecreasesWithParam);
  CHECK(d.default_range.min == 1.0);
  CHECK(d.default_range.max == 64.0);
  CHECK(r.Get("dct")->DefaultRange(16).max == 64.0 * 256);
  CHECK(DirectionForKind(ParamKind::kBitsPerPixel) ==
        QualityDirection::kMetricIncreasesWithParam);
}

TEST_CASE("constant image survives any step up to 64") {
  const RasterImage flat = RasterImage::Filled(40, 24, 8, 128);
  for (auto w : {DctCodec::Weighting::kFlat, DctCodec::Weighting::kCsf}) {
    const DctCodec codec(w);
    for (double qs : {1.0, 2.0, 7.5, 16.0, 33.3, 64.0}) {
      CHECK(codec.Decompress(codec.Compress(flat, QS(qs))) == flat);
    }
  }
}

TEST_CASE("determinism and self-describing blobs") {
  const RasterImage img = testing::Crop(testing::LoadData("camera.pgm"), 200, 120);
  const DctCodec codec;
  const CompressedBlob a = codec.Compress(img, QS(9.25));
  const CompressedBlob b = codec.Compress(img, QS(9.25));
  CHECK(SerializeBlob(a) == SerializeBlob(b));
  CHECK(a.backend == EntropyBackend::kDeflate);
  CHECK(a.codec_id == "dct");
  // Decoding needs only the serialized container.
  const CompressedBlob parsed = ParseBlob(SerializeBlob(a));
  CHECK(codec.Decompress(parsed) == codec.Decompress(a));
}

TEST_CASE("geometry preserved for odd sizes and both depths") {
  const DctCodec codec;
  for (auto [w, h, d] : {std::tuple{1, 1, 8}, {17, 5, 8}, {33, 47, 16}, {16, 16, 16}}) {
    const RasterImage img = testing::RandomImage(w, h, d, w * 100 + h);
    for (double qs : {1.0, 13.0, 64.0}) {
      const RasterImage out = codec.Decompress(codec.Compress(img, QS(qs)));
      CHECK(out.width() == w);
      CHECK(out.height() == h);
      CHECK(out.bit_depth() == d);
    }
  }
}

TEST_CASE("qs one is near lossless on natural images") {
  const DctCodec codec;
  const Metric& psnr = BuiltinMetrics().Get("psnr");
  for (const auto& name : testing::NaturalImages()) {
    const RasterImage img = testing::LoadData(name);
    const RasterImage out = codec.Decompress(codec.Compress(img, QS(1)));
    CHECK_MESSAGE(psnr.evaluate(img, out) >= 50.0, name);
  }
}

TEST_CASE("fidelity is monotone in qs and error is bounded") {
  const Metric& psnr = BuiltinMetrics().Get("psnr");
  for (auto w : {DctCodec::Weighting::kFlat, DctCodec::Weighting::kCsf}) {
    const DctCodec codec(w);
    for (const auto& name : testing::NaturalImages()) {
      const RasterImage img = testing::Crop(testing::LoadData(name), 256, 256);
      double prev = 1e9;
      for (double qs = 1; qs <= 64; qs *= 2) {
        const RasterImage out = codec.Decompress(codec.Compress(img, QS(qs)));
        const double v = psnr.evaluate(img, out);
        CHECK_MESSAGE(v <= prev + 0.2, name << " qs=" << qs);
        prev = v;
        CHECK_MESSAGE(testing::MaxAbsDiff(img, out) <= qs * codec.block_size(),
                      name << " qs=" << qs);
      }
    }
  }
}

TEST_CASE("decoder rejects corrupt and foreign blobs") {
  const DctCodec codec;
  const RasterImage img = testing::RandomImage(32, 32, 8, 9);
  const CompressedBlob good = codec.Compress(img, QS(4));
  for (std::size_t n = 0; n < good.payload.size(); n += 7) {
    CompressedBlob cut = good;
    cut.payload.resize(n);
    CHECK_THROWS_AS(codec.Decompress(cut), CodecError);
  }
  CompressedBlob foreign = good;
  foreign.codec_id = "dct-m";
  CHECK_THROWS_AS(codec.Decompress(foreign), CodecError);
  CompressedBlob flipped = good;
  flipped.payload[flipped.payload.size() / 2] ^= 0x5A;
  try {
    (void)codec.Decompress(flipped);  // may still decode; must not crash
  } catch (const CodecError&) {
  }
  CHECK_THROWS_AS(codec.Compress(img, {ParamKind::kBitsPerPixel, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(codec.Compress(img, QS(0)), InvalidArgument);
}

TEST_CASE("csf weight table") {
  for (int n : {4, 8, 16, 32}) {
    const std::vector<double> w = CsfWeightTable(n);
    REQUIRE(w.size() == std::size_t(n * n));
    CHECK(w[0] == 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(w[i * n + j] >= 1.0);
        if (j + 1 < n) CHECK(w[i * n + j + 1] >= w[i * n + j]);
        if (i + 1 < n) CHECK(w[(i + 1) * n + j] >= w[i * n + j]);
      }
    }
  }
  CHECK_THROWS_AS(CsfWeightTable(12), InvalidArgument);
  CHECK_THROWS_AS(DctCodec(DctCodec::Weighting::kFlat, 12), InvalidArgument);
}

TEST_CASE("weighted codec spends fewer bytes at equal step") {
  const RasterImage img = testing::LoadData("astronaut.pgm");
  const DctCodec flat(DctCodec::Weighting::kFlat);
  const DctCodec csf(DctCodec::Weighting::kCsf);
  CHECK(csf.Compress(img, QS(8)).payload.size() < flat.Compress(img, QS(8)).payload.size());
}

TEST_CASE("concurrent compression matches serial") {
  const DctCodec codec;
  const RasterImage img = testing::Crop(testing::LoadData("moon.pgm"), 128, 128);
  const Bytes serial = SerializeBlob(codec.Compress(img, QS(5)));
  std::vector<std::thread> pool;
  std::vector<Bytes> out(4);
  for (int i = 0; i < 4; ++i) {
    pool.emplace_back([&, i] { out[i] = SerializeBlob(codec.Compress(img, QS(5))); });
  }
  for (auto& t : pool) t.join();
  for (const auto& o : out) CHECK(o == serial);
}

}  // TEST_SUITE

}  // namespace
}  // namespace qpress
