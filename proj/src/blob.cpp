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

#include "qpress/blob.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "qpress/error.hpp"

namespace qpress {

namespace {

constexpr char kMagic[4] = {'Q', 'P', 'C', 'B'};

void PutU8(Bytes& out, std::uint8_t v) { out.push_back(v); }

void PutU16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutU64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t Get(int n) {
    if (bytes_.size() - pos_ < static_cast<std::size_t>(n)) {
      throw FormatError("truncated container header");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> Take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated container");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view ParamKindName(ParamKind kind) {
  switch (kind) {
    case ParamKind::kQuantizationStep:
      return "quantization_step";
    case ParamKind::kScalingFactor:
      return "scaling_factor";
    case ParamKind::kBitsPerPixel:
      return "bits_per_pixel";
  }
  return "unknown";
}

ParamKind ParseParamKind(std::string_view name) {
  if (name == "quantization_step" || name == "qs") return ParamKind::kQuantizationStep;
  if (name == "scaling_factor" || name == "sf") return ParamKind::kScalingFactor;
  if (name == "bits_per_pixel" || name == "bpp") return ParamKind::kBitsPerPixel;
  throw InvalidArgument("unknown parameter kind '" + std::string(name) + "'");
}

void ControlParameter::Validate() const {
  if (!std::isfinite(value) || value <= 0.0) {
    throw InvalidArgument("control parameter must be positive and finite");
  }
  if (kind == ParamKind::kBitsPerPixel && value > 8.0) {
    throw InvalidArgument("bits-per-pixel parameter must lie in (0, 8]");
  }
}

void ParameterRange::Validate() const {
  ControlParameter{kind, min}.Validate();
  ControlParameter{kind, max}.Validate();
  if (!(min < max)) {
    throw InvalidArgument("parameter range needs min < max");
  }
}

std::size_t ContainerHeaderSize(const CompressedBlob& blob) {
  return 4 + 2 + 1 + blob.codec_id.size() + 1 + 8 + 4 + 4 + 1 + 1 + 4;
}

Bytes SerializeBlob(const CompressedBlob& blob) {
  if (blob.codec_id.empty() || blob.codec_id.size() > 255) {
    throw InvalidArgument("codec id must be 1..255 characters");
  }
  if (blob.payload.size() > 0xffffffffu) {
    throw InvalidArgument("payload exceeds 4 GiB");
  }
  Bytes out;
  out.reserve(ContainerHeaderSize(blob) + blob.payload.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU16(out, kContainerVersion);
  PutU8(out, static_cast<std::uint8_t>(blob.codec_id.size()));
  out.insert(out.end(), blob.codec_id.begin(), blob.codec_id.end());
  PutU8(out, static_cast<std::uint8_t>(blob.param.kind));
  PutU64(out, std::bit_cast<std::uint64_t>(blob.param.value));
  PutU32(out, static_cast<std::uint32_t>(blob.width));
  PutU32(out, static_cast<std::uint32_t>(blob.height));
  PutU8(out, static_cast<std::uint8_t>(blob.bit_depth));
  PutU8(out, static_cast<std::uint8_t>(blob.backend));
  PutU32(out, static_cast<std::uint32_t>(blob.payload.size()));
  out.insert(out.end(), blob.payload.begin(), blob.payload.end());
  return out;
}

CompressedBlob ParseBlob(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.Take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("not a qpress container (bad magic)");
  }
  const auto version = r.Get(2);
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  CompressedBlob blob;
  const auto id_len = r.Get(1);
  if (id_len == 0) throw FormatError("empty codec id in container");
  const auto id = r.Take(id_len);
  blob.codec_id.assign(id.begin(), id.end());
  const auto kind = r.Get(1);
  if (kind > static_cast<std::uint8_t>(ParamKind::kBitsPerPixel)) {
    throw FormatError("unknown parameter kind in container");
  }
  blob.param.kind = static_cast<ParamKind>(kind);
  blob.param.value = std::bit_cast<double>(r.Get(8));
  blob.width = static_cast<int>(r.Get(4));
  blob.height = static_cast<int>(r.Get(4));
  blob.bit_depth = static_cast<int>(r.Get(1));
  const auto backend = r.Get(1);
  if (backend > static_cast<std::uint8_t>(EntropyBackend::kDeflate)) {
    throw FormatError("unknown entropy backend in container");
  }
  blob.backend = static_cast<EntropyBackend>(backend);
  const auto length = r.Get(4);
  if (blob.width <= 0 || blob.height <= 0 ||
      (blob.bit_depth != 8 && blob.bit_depth != 16)) {
    throw FormatError("container header has invalid image geometry");
  }
  if (r.remaining() != length) {
    throw FormatError("container payload length mismatch: header says " +
                      std::to_string(length) + ", have " +
                      std::to_string(r.remaining()));
  }
  const auto payload = r.Take(length);
  blob.payload.assign(payload.begin(), payload.end());
  return blob;
}

namespace {

void CheckMatches(const RasterImage& image, const CompressedBlob& blob) {
  if (image.width() != blob.width || image.height() != blob.height ||
      image.bit_depth() != blob.bit_depth) {
    throw InvalidArgument("blob geometry does not match the image");
  }
}

}  // namespace

double CompressionRatio(const RasterImage& image, const CompressedBlob& blob) {
  CheckMatches(image, blob);
  if (blob.payload.empty()) {
    throw InvalidArgument("compression ratio undefined for an empty payload");
  }
  return static_cast<double>(image.raw_bytes()) /
         static_cast<double>(blob.payload.size());
}

double BitsPerPixel(const RasterImage& image, const CompressedBlob& blob) {
  CheckMatches(image, blob);
  return 8.0 * static_cast<double>(blob.payload.size()) /
         static_cast<double>(image.pixel_count());
}

}  // namespace qpress
