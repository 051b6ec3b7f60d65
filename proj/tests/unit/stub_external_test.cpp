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

#include <cstdlib>

#include "doctest.h"
#include "qpress/blob.hpp"
#include "qpress/dct_codec.hpp"
#include "qpress/error.hpp"
#include "qpress/external_codec.hpp"
#include "qpress/stub_codec.hpp"
#include "test_support.hpp"

namespace qpress {
namespace {

const RasterImage& Canvas() {
  static const RasterImage img = RasterImage::Filled(512, 512, 8, 0);
  return img;
}

TEST_SUITE("stub") {

TEST_CASE("designated metric returns the profile exactly") {
  const StubCodec stub(ResponseProfile::Affine(60, -1, 1, 50));
  const Metric m = *stub.MetricOverride("psnr");
  const RasterImage out = stub.Decompress(stub.Compress(Canvas(), {ParamKind::kQuantizationStep, 20}));
  CHECK(m.evaluate(Canvas(), out) == 40.0);
  for (double p : {1.0, 3.14159, 49.999, 50.0}) {
    const RasterImage o = stub.Decompress(stub.Compress(Canvas(), {ParamKind::kQuantizationStep, p}));
    CHECK(m.evaluate(Canvas(), o) == 60.0 - p);
  }
  CHECK_FALSE(stub.MetricOverride("ssim").has_value());
}

TEST_CASE("domain and monotonicity contracts") {
  const ResponseProfile p = ResponseProfile::Affine(60, -1, 1, 50);
  CHECK_THROWS_AS(p(0.5), InvalidArgument);
  CHECK_THROWS_AS(p(50.5), InvalidArgument);
  CHECK(p.orientation() == -1);
  const StubCodec stub(p);
  CHECK_THROWS_AS(stub.Compress(Canvas(), {ParamKind::kQuantizationStep, 51}), InvalidArgument);
  CHECK_THROWS_AS(ResponseProfile::Affine(60, 0, 1, 50), InvalidArgument);
  CHECK_THROWS_AS(ResponseProfile::Tabulated({{1, 10}, {2, 12}, {3, 11}}), InvalidArgument);
  CHECK_THROWS_AS(ResponseProfile::Parse("table:1=10,2=12,3=11"), InvalidArgument);
  CHECK_THROWS_AS(ResponseProfile::Parse("cubic:1,2@1,2"), InvalidArgument);
  // Increasing response with a step-size kind is contradictory.
  CHECK_THROWS_AS(StubCodec(ResponseProfile::Affine(0, 1, 1, 50)), InvalidArgument);
  StubOptions bpp;
  bpp.param_kind = ParamKind::kBitsPerPixel;
  CHECK_NOTHROW(StubCodec(ResponseProfile::Affine(20, 5, 0.1, 8), bpp));
}

TEST_CASE("text profiles") {
  const ResponseProfile a = ResponseProfile::Parse("affine:60,-1@1,50");
  CHECK(a(20) == 40.0);
  const ResponseProfile l = ResponseProfile::Parse("log2:60,-8@1,64");
  CHECK(l(16) == doctest::Approx(28.0));
  const ResponseProfile t = ResponseProfile::Parse("table:1=50,3=40,11=20");
  CHECK(t(2) == doctest::Approx(45.0));
  CHECK(t(7) == doctest::Approx(30.0));
  const ResponseProfile n = ResponseProfile::Parse("affine:60,-1@1,50~0.05");
  for (double p = 1; p <= 50; p += 0.37) CHECK(std::abs(n(p) - (60 - p)) <= 0.05);
  CHECK(n(17.0) == n(17.0));
}

TEST_CASE("payload length gives the declared ratio") {
  const StubCodec stub(ResponseProfile::Affine(60, -1, 1, 50));
  const CompressedBlob b = stub.Compress(Canvas(), {ParamKind::kQuantizationStep, 10});
  CHECK(b.payload.size() == 26215u);  // ceil(262144 / 10)
  CHECK(CompressionRatio(Canvas(), b) == doctest::Approx(10.0).epsilon(1e-4));
  StubOptions bpp;
  bpp.param_kind = ParamKind::kBitsPerPixel;
  const StubCodec rate(ResponseProfile::Affine(20, 5, 0.1, 8), bpp);
  const CompressedBlob r = rate.Compress(Canvas(), {ParamKind::kBitsPerPixel, 1});
  CHECK(BitsPerPixel(Canvas(), r) == 1.0);
}

TEST_CASE("rejects foreign blobs") {
  const StubCodec stub(ResponseProfile::Affine(60, -1, 1, 50));
  CompressedBlob b = stub.Compress(Canvas(), {ParamKind::kQuantizationStep, 10});
  b.codec_id = "dct";
  CHECK_THROWS_AS(stub.Decompress(b), CodecError);
  b.codec_id = "stub";
  b.payload.resize(4);
  CHECK_THROWS_AS(stub.Decompress(b), CodecError);
}

}  // TEST_SUITE

TEST_SUITE("external") {

std::string Config(const std::string& encode, const std::string& decode,
                   const std::string& extra = "") {
  return "codec_id: ext\nencode_cmd: " + encode + "\ndecode_cmd: " + decode +
         "\nparam_kind: quantization_step\nparam_min: 1\nparam_max: 64\n" + extra;
}

TEST_CASE("config parsing") {
  const ExternalCodecConfig c = ParseExternalCodecConfig(
      "# comment\n" + Config("cp {in} {out}", "cp {in} {out}", "output: container\n"));
  CHECK(c.codec_id == "ext");
  CHECK(c.range.min == 1.0);
  CHECK(c.range.max == 64.0);
  CHECK(c.container_output);
  CHECK(c.quality_direction == QualityDirection::kMetricDecreasesWithParam);
  CHECK_THROWS_AS(ParseExternalCodecConfig(Config("cp {in} {out}", "cp {in} {out}", "speed: 3\n")),
                  FormatError);
  CHECK_THROWS_AS(ParseExternalCodecConfig(Config("cp {in}", "cp {in} {out}")), FormatError);
  CHECK_THROWS_AS(
      ParseExternalCodecConfig(Config("cp {in} {out}", "cp {in} {out}",
                                      "quality_direction: metric_increases_with_param\n")),
      InvalidArgument);
}

TEST_CASE("missing tool detected at registration") {
  const ExternalCodecConfig c =
      ParseExternalCodecConfig(Config("qpress-no-such-tool {in} {out}", "cp {in} {out}"));
  CHECK_THROWS_WITH_AS(ExternalCodec{c}, doctest::Contains("tool not found"), CodecError);
}

TEST_CASE("nonzero exit carries diagnostics") {
  const ExternalCodecConfig c = ParseExternalCodecConfig(
      Config("sh -c 'echo broken encoder >&2; exit 3' {in} {out}", "cp {in} {out}"));
  const ExternalCodec codec(c);
  const RasterImage img = testing::RandomImage(8, 8, 8, 1);
  try {
    (void)codec.Compress(img, {ParamKind::kQuantizationStep, 2});
    FAIL("expected CodecError");
  } catch (const CodecError& e) {
    CHECK(std::string(e.what()).find("exit 3") != std::string::npos);
    CHECK(std::string(e.what()).find("broken encoder") != std::string::npos);
  }
}

TEST_CASE("missing output file") {
  const ExternalCodec codec(ParseExternalCodecConfig(Config("true {in} {out}", "cp {in} {out}")));
  CHECK_THROWS_WITH_AS(codec.Compress(testing::RandomImage(8, 8, 8, 1),
                                      {ParamKind::kQuantizationStep, 2}),
                       doctest::Contains("no output"), CodecError);
}

TEST_CASE("payload mode round trip through cp") {
  testing::ScratchDir tmp;
  ::setenv("QPRESS_TMPDIR", tmp.path().c_str(), 1);
  const ExternalCodec codec(ParseExternalCodecConfig(Config("cp {in} {out}", "cp {in} {out}")));
  const RasterImage img = testing::RandomImage(13, 9, 16, 4);
  const CompressedBlob blob = codec.Compress(img, {ParamKind::kQuantizationStep, 2});
  CHECK(blob.codec_id == "ext");
  CHECK(blob.payload == StorePgm(img));
  CHECK(codec.Decompress(blob) == img);
  ::unsetenv("QPRESS_TMPDIR");
  // Per-call temp directories are cleaned up.
  CHECK(std::filesystem::is_empty(tmp.path()));
}

TEST_CASE("self hosting reproduces the built-in codec byte for byte") {
  const std::string bin = testing::Quote(QPRESS_BIN);
  ExternalCodecConfig c = ParseExternalCodecConfig(
      "codec_id: dct\nencode_cmd: " + bin +
      " encode --codec dct --in {in} --out {out} --param {param}\n"
      "decode_cmd: " + bin + " decode --in {in} --out {out}\n"
      "param_kind: quantization_step\nparam_min: 1\nparam_max: 64\noutput: container\n");
  const ExternalCodec ext(c);
  const DctCodec builtin;
  const RasterImage img = testing::Crop(testing::LoadData("camera.pgm"), 96, 80);
  for (double qs : {1.0, 7.3, 1.0 / 3.0 + 20, 64.0}) {
    const CompressedBlob a = ext.Compress(img, {ParamKind::kQuantizationStep, qs});
    const CompressedBlob b = builtin.Compress(img, {ParamKind::kQuantizationStep, qs});
    CHECK(SerializeBlob(a) == SerializeBlob(b));
    CHECK(ext.Decompress(a) == builtin.Decompress(b));
  }
}

TEST_CASE("container mode rejects mismatched codec ids") {
  const std::string bin = testing::Quote(QPRESS_BIN);
  const ExternalCodec ext(ParseExternalCodecConfig(
      "codec_id: other\nencode_cmd: " + bin +
      " encode --codec dct --in {in} --out {out} --param {param}\n"
      "decode_cmd: " + bin + " decode --in {in} --out {out}\n"
      "param_kind: quantization_step\nparam_min: 1\nparam_max: 64\noutput: container\n"));
  CHECK_THROWS_AS(ext.Compress(testing::RandomImage(16, 16, 8, 2),
                               {ParamKind::kQuantizationStep, 4}),
                  CodecError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace qpress
