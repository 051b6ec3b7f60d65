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

#ifndef QPRESS_DCT_CODEC_HPP_
#define QPRESS_DCT_CODEC_HPP_

#include <vector>

#include "qpress/codec.hpp"

namespace qpress {

// Per-frequency quantization multipliers for an NxN block (row-major,
// row = vertical frequency). Derived from the PSNR-HVS contrast sensitivity
// table resampled to the block's frequency grid and inverted: w[0][0] == 1,
// every entry >= 1, non-decreasing along rows and columns.
// Supported sizes: 4, 8, 16, 32.
std::vector<double> CsfWeightTable(int block_size);

// Block-DCT codec. Each block is level-shifted, transformed with an
// orthonormal 2-D DCT-II and quantized mid-tread:
//   q = round(c / (QS * w))
// with w == 1 (plain) or w from CsfWeightTable (weighted). Quantized
// blocks are zig-zag scanned, DC is coded differentially, AC as
// (zero-run, level) pairs, and the byte stream is deflated.
//
// Payload layout: u8 block size, u8 weighting (0 plain, 1 csf), then the
// deflate stream.
class DctCodec final : public Codec {
 public:
  enum class Weighting { kFlat, kCsf };

  explicit DctCodec(Weighting weighting = Weighting::kFlat, int block_size = 16);

  const CodecDescriptor& descriptor() const override { return descriptor_; }
  CompressedBlob Compress(const RasterImage& image,
                          ControlParameter param) const override;
  RasterImage Decompress(const CompressedBlob& blob) const override;
  ParameterRange DefaultRange(int bit_depth) const override;

  int block_size() const { return block_size_; }
  Weighting weighting() const { return weighting_; }

 private:
  CodecDescriptor descriptor_;
  Weighting weighting_;
  int block_size_;
  std::vector<double> basis_;    // block_size x block_size, row = frequency
  std::vector<double> weights_;  // block_size x block_size
  std::vector<int> zigzag_;      // scan position -> raster index
};

}  // namespace qpress

#endif  // QPRESS_DCT_CODEC_HPP_
