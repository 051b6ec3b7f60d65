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

// Raster and spectral-cube data model plus PGM / RAW file I/O.

#ifndef QPRESS_IMAGE_HPP_
#define QPRESS_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qpress {

using Bytes = std::vector<std::uint8_t>;

// Single-channel raster. Samples are row-major and always stored as 16-bit
// words; bit_depth (8 or 16) bounds their range. Immutable once built.
class RasterImage {
 public:
  RasterImage() = default;
  // Throws InvalidArgument if the size or any sample violates the invariants.
  RasterImage(int width, int height, int bit_depth,
              std::vector<std::uint16_t> samples);

  static RasterImage Filled(int width, int height, int bit_depth,
                            std::uint16_t value);

  int width() const { return width_; }
  int height() const { return height_; }
  int bit_depth() const { return bit_depth_; }
  bool empty() const { return samples_.empty(); }
  std::size_t pixel_count() const { return samples_.size(); }
  std::uint32_t max_value() const { return (1u << bit_depth_) - 1u; }
  // Size of the uncompressed samples in bytes (no header).
  std::size_t raw_bytes() const {
    return samples_.size() * static_cast<std::size_t>(bit_depth_ / 8);
  }

  std::span<const std::uint16_t> samples() const { return samples_; }
  std::uint16_t at(int x, int y) const {
    return samples_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool same_shape(const RasterImage& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           bit_depth_ == other.bit_depth_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int bit_depth_ = 8;
  std::vector<std::uint16_t> samples_;
};

// Ordered set of equally shaped bands.
class SpectralCube {
 public:
  // Rejects empty band lists, mismatched band shapes and label counts.
  explicit SpectralCube(std::vector<RasterImage> bands,
                        std::vector<std::string> labels = {});

  std::size_t band_count() const { return bands_.size(); }
  const RasterImage& band(std::size_t i) const { return bands_.at(i); }
  const std::vector<RasterImage>& bands() const { return bands_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int width() const { return bands_.front().width(); }
  int height() const { return bands_.front().height(); }
  int bit_depth() const { return bands_.front().bit_depth(); }

  friend bool operator==(const SpectralCube&, const SpectralCube&) = default;

 private:
  std::vector<RasterImage> bands_;
  std::vector<std::string> labels_;
};

// Binary greyscale PGM ("P5"), maxval 255 or 65535. 16-bit samples are
// big-endian. Comments and arbitrary whitespace are accepted on input.
RasterImage LoadPgm(std::span<const std::uint8_t> bytes);
// Canonical encoding: "P5\n<w> <h>\n<maxval>\n" followed by the samples.
Bytes StorePgm(const RasterImage& image);

enum class ByteOrder { kLittle, kBig };

// Sidecar describing a band-sequential RAW buffer.
struct RawDescriptor {
  int width = 0;
  int height = 0;
  int bands = 1;
  int bit_depth = 16;
  ByteOrder byte_order = ByteOrder::kLittle;

  std::size_t expected_bytes() const;
  friend bool operator==(const RawDescriptor&, const RawDescriptor&) = default;
};

// Sidecar text: "key: value" lines (width, height, bands, bit_depth,
// byte_order = little|big, layout = band_sequential). '#' starts a comment.
RawDescriptor ParseRawDescriptor(std::string_view text);
std::string FormatRawDescriptor(const RawDescriptor& descriptor);

SpectralCube LoadRaw(std::span<const std::uint8_t> bytes,
                     const RawDescriptor& descriptor);

struct RawBuffer {
  Bytes bytes;
  RawDescriptor descriptor;
};
RawBuffer CubeToRaw(const SpectralCube& cube,
                    ByteOrder byte_order = ByteOrder::kLittle);

// Whole-file helpers. WriteFileAtomic writes to a sibling temp file and
// renames it into place.
Bytes ReadFile(const std::filesystem::path& path);
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view text);

}  // namespace qpress

#endif  // QPRESS_IMAGE_HPP_
