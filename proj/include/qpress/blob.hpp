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

// Codec control parameters and the self-describing compressed container.

#ifndef QPRESS_BLOB_HPP_
#define QPRESS_BLOB_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "qpress/image.hpp"

namespace qpress {

// The single knob a codec exposes. Scaling factor is the same knob as the
// quantization step on the built-in codecs.
enum class ParamKind : std::uint8_t {
  kQuantizationStep = 0,
  kScalingFactor = 1,
  kBitsPerPixel = 2,
};

std::string_view ParamKindName(ParamKind kind);
// Accepts the names produced by ParamKindName ("quantization_step", ...).
ParamKind ParseParamKind(std::string_view name);

struct ControlParameter {
  ParamKind kind = ParamKind::kQuantizationStep;
  double value = 1.0;

  // value > 0 and finite; bpp additionally in (0, 8].
  void Validate() const;
  friend bool operator==(const ControlParameter&,
                         const ControlParameter&) = default;
};

struct ParameterRange {
  ParamKind kind = ParamKind::kQuantizationStep;
  double min = 1.0;
  double max = 64.0;

  // min < max, both valid parameter values of `kind`.
  void Validate() const;
  bool Contains(double v) const { return v >= min && v <= max; }
  friend bool operator==(const ParameterRange&,
                         const ParameterRange&) = default;
};

// Identifies the lossless stage that produced the payload.
enum class EntropyBackend : std::uint8_t {
  kNone = 0,     // payload is opaque or stored as-is
  kDeflate = 1,  // zlib stream
};

struct CompressedBlob {
  std::string codec_id;
  ControlParameter param;
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  EntropyBackend backend = EntropyBackend::kNone;
  Bytes payload;

  friend bool operator==(const CompressedBlob&, const CompressedBlob&) = default;
};

// Container layout, all integers little-endian:
//   0  4  magic "QPCB"
//   4  2  format version (1)
//   6  1  codec id length L (1..255)
//   7  L  codec id, ASCII
//   .  1  parameter kind
//   .  8  parameter value, IEEE-754 binary64
//   .  4  width
//   .  4  height
//   .  1  bit depth
//   .  1  entropy backend
//   .  4  payload length N
//   .  N  payload
inline constexpr std::uint16_t kContainerVersion = 1;
std::size_t ContainerHeaderSize(const CompressedBlob& blob);
Bytes SerializeBlob(const CompressedBlob& blob);
// Throws FormatError on bad magic, version, truncation or trailing bytes.
CompressedBlob ParseBlob(std::span<const std::uint8_t> bytes);

// Uncompressed sample bytes over payload bytes.
double CompressionRatio(const RasterImage& image, const CompressedBlob& blob);
// 8 x payload bytes over pixel count.
double BitsPerPixel(const RasterImage& image, const CompressedBlob& blob);

}  // namespace qpress

#endif  // QPRESS_BLOB_HPP_
