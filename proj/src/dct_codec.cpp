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

#include "qpress/dct_codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "qpress/error.hpp"
#include "qpress/metrics.hpp"

namespace qpress {

namespace {

constexpr double kMaxStep = 1.0e6;

bool SupportedBlockSize(int n) { return n == 4 || n == 8 || n == 16 || n == 32; }

std::vector<double> DctBasis(int n) {
  std::vector<double> m(std::size_t(n) * n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      m[std::size_t(k) * n + i] =
          scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }
  return m;
}

std::vector<int> ZigZag(int n) {
  std::vector<int> order;
  order.reserve(std::size_t(n) * n);
  for (int s = 0; s <= 2 * (n - 1); ++s) {
    if (s % 2 == 0) {
      for (int y = std::min(s, n - 1); y >= 0 && s - y < n; --y) order.push_back(y * n + (s - y));
    } else {
      for (int x = std::min(s, n - 1); x >= 0 && s - x < n; --x) order.push_back((s - x) * n + x);
    }
  }
  return order;
}

// out = basis * in * basis^T (forward) or basis^T * in * basis (inverse).
void Transform2d(const std::vector<double>& basis, int n, const double* in,
                 double* out, bool inverse) {
  std::vector<double> tmp(std::size_t(n) * n);
  auto b = [&](int r, int c) {
    return inverse ? basis[std::size_t(c) * n + r] : basis[std::size_t(r) * n + c];
  };
  // rows
  for (int y = 0; y < n; ++y) {
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += b(k, i) * in[y * n + i];
      tmp[std::size_t(y) * n + k] = acc;
    }
  }
  // columns
  for (int k = 0; k < n; ++k) {
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += b(k, i) * tmp[std::size_t(i) * n + x];
      out[k * n + x] = acc;
    }
  }
}

void PutVarint(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

void PutSigned(Bytes& out, std::int64_t v) {
  PutVarint(out, (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63));
}

class SymbolReader {
 public:
  explicit SymbolReader(const Bytes& bytes) : bytes_(bytes) {}

  std::uint64_t Varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= bytes_.size()) throw CodecError("corrupt payload: symbol stream ended early");
      const std::uint8_t byte = bytes_[pos_++];
      v |= std::uint64_t{byte & 0x7fu} << shift;
      if ((byte & 0x80) == 0) return v;
    }
    throw CodecError("corrupt payload: overlong varint");
  }

  std::int64_t Signed() {
    const std::uint64_t u = Varint();
    return static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1);
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  const Bytes& bytes_;
  std::size_t pos_ = 0;
};

Bytes Deflate(const Bytes& in) {
  uLongf bound = compressBound(static_cast<uLong>(in.size()));
  Bytes out(bound);
  const int rc = compress2(out.data(), &bound, in.data(), static_cast<uLong>(in.size()),
                           Z_BEST_COMPRESSION);
  if (rc != Z_OK) throw CodecError("deflate failed");
  out.resize(bound);
  return out;
}

Bytes Inflate(std::span<const std::uint8_t> in, std::size_t limit) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw CodecError("inflate init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  Bytes out;
  std::uint8_t chunk[1 << 15];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw CodecError("corrupt payload: deflate stream is damaged or truncated");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    if (out.size() > limit) {
      inflateEnd(&zs);
      throw CodecError("corrupt payload: symbol stream larger than possible");
    }
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw CodecError("corrupt payload: deflate stream is truncated");
    }
  }
  const bool trailing = zs.avail_in != 0;
  inflateEnd(&zs);
  if (trailing) throw CodecError("corrupt payload: trailing bytes after stream");
  return out;
}

}  // namespace

std::vector<double> CsfWeightTable(int block_size) {
  if (!SupportedBlockSize(block_size)) {
    throw InvalidArgument("unsupported block size " + std::to_string(block_size) +
                          " (expected 4, 8, 16 or 32)");
  }
  const int n = block_size;
  // Bilinear lookup on the 8x8 table; index k of an n-point DCT covers the
  // same spatial frequency as index 8k/n of the 8-point one.
  auto csf_at = [](double v, double u) {
    v = std::clamp(v, 0.0, 7.0);
    u = std::clamp(u, 0.0, 7.0);
    const int v0 = static_cast<int>(std::floor(v));
    const int u0 = static_cast<int>(std::floor(u));
    const int v1 = std::min(v0 + 1, 7);
    const int u1 = std::min(u0 + 1, 7);
    const double fv = v - v0;
    const double fu = u - u0;
    return (1 - fv) * ((1 - fu) * kHvsCsf[v0][u0] + fu * kHvsCsf[v0][u1]) +
           fv * ((1 - fu) * kHvsCsf[v1][u0] + fu * kHvsCsf[v1][u1]);
  };
  std::vector<double> w(std::size_t(n) * n);
  const double dc = kHvsCsf[0][0];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double csf = csf_at(8.0 * i / n, 8.0 * j / n);
      w[std::size_t(i) * n + j] = std::max(1.0, dc / csf);
    }
  }
  // Running maximum makes the table monotone along both axes.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double& v = w[std::size_t(i) * n + j];
      if (i > 0) v = std::max(v, w[std::size_t(i - 1) * n + j]);
      if (j > 0) v = std::max(v, w[std::size_t(i) * n + j - 1]);
    }
  }
  w[0] = 1.0;
  return w;
}

DctCodec::DctCodec(Weighting weighting, int block_size)
    : weighting_(weighting), block_size_(block_size) {
  if (!SupportedBlockSize(block_size)) {
    throw InvalidArgument("unsupported block size " + std::to_string(block_size));
  }
  descriptor_.codec_id = weighting == Weighting::kFlat ? "dct" : "dct-m";
  descriptor_.param_kind = ParamKind::kQuantizationStep;
  descriptor_.default_range = {ParamKind::kQuantizationStep, 1.0, 64.0};
  descriptor_.quality_direction = QualityDirection::kMetricDecreasesWithParam;
  basis_ = DctBasis(block_size);
  weights_ = weighting == Weighting::kCsf
                 ? CsfWeightTable(block_size)
                 : std::vector<double>(std::size_t(block_size) * block_size, 1.0);
  zigzag_ = ZigZag(block_size);
}

ParameterRange DctCodec::DefaultRange(int bit_depth) const {
  // Steps scale with the sample range so 16-bit data sees the same
  // quality span as 8-bit data.
  const double scale = bit_depth > 8 ? std::ldexp(1.0, bit_depth - 8) : 1.0;
  return {ParamKind::kQuantizationStep, scale * descriptor_.default_range.min,
          scale * descriptor_.default_range.max};
}

CompressedBlob DctCodec::Compress(const RasterImage& image,
                                  ControlParameter param) const {
  CheckParamKind(param);
  if (param.value > kMaxStep) {
    throw InvalidArgument("quantization step above " + std::to_string(kMaxStep));
  }
  if (image.empty()) throw InvalidArgument("cannot compress an empty image");

  const int n = block_size_;
  const int w = image.width();
  const int h = image.height();
  const int bw = (w + n - 1) / n;
  const int bh = (h + n - 1) / n;
  const double shift = std::ldexp(1.0, image.bit_depth() - 1);
  const double step = param.value;

  Bytes symbols;
  symbols.reserve(std::size_t(w) * h / 2);
  std::vector<double> block(std::size_t(n) * n);
  std::vector<double> coeff(std::size_t(n) * n);
  std::int64_t prev_dc = 0;
  constexpr double kLimit = static_cast<double>(std::numeric_limits<std::int32_t>::max());

  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      for (int y = 0; y < n; ++y) {
        const int sy = std::min(by * n + y, h - 1);
        for (int x = 0; x < n; ++x) {
          const int sx = std::min(bx * n + x, w - 1);
          block[std::size_t(y) * n + x] = image.at(sx, sy) - shift;
        }
      }
      Transform2d(basis_, n, block.data(), coeff.data(), /*inverse=*/false);
      int run = 0;
      for (int s = 0; s < n * n; ++s) {
        const int idx = zigzag_[s];
        const double q = std::clamp(std::round(coeff[idx] / (step * weights_[idx])), -kLimit, kLimit);
        const auto level = static_cast<std::int64_t>(q);
        if (s == 0) {
          PutSigned(symbols, level - prev_dc);
          prev_dc = level;
        } else if (level == 0) {
          ++run;
        } else {
          PutVarint(symbols, static_cast<std::uint64_t>(run) + 1);
          PutSigned(symbols, level);
          run = 0;
        }
      }
      PutVarint(symbols, 0);  // end of block
    }
  }

  CompressedBlob blob;
  blob.codec_id = descriptor_.codec_id;
  blob.param = param;
  blob.width = w;
  blob.height = h;
  blob.bit_depth = image.bit_depth();
  blob.backend = EntropyBackend::kDeflate;
  blob.payload.push_back(static_cast<std::uint8_t>(n));
  blob.payload.push_back(weighting_ == Weighting::kFlat ? 0 : 1);
  const Bytes packed = Deflate(symbols);
  blob.payload.insert(blob.payload.end(), packed.begin(), packed.end());
  return blob;
}

RasterImage DctCodec::Decompress(const CompressedBlob& blob) const {
  if (blob.codec_id != descriptor_.codec_id) {
    throw CodecError("blob was produced by codec '" + blob.codec_id +
                     "', not '" + descriptor_.codec_id + "'");
  }
  if (blob.backend != EntropyBackend::kDeflate) {
    throw CodecError("corrupt payload: unexpected entropy backend");
  }
  if (blob.width <= 0 || blob.height <= 0 ||
      (blob.bit_depth != 8 && blob.bit_depth != 16)) {
    throw CodecError("corrupt payload: invalid geometry in header");
  }
  if (!std::isfinite(blob.param.value) || blob.param.value <= 0.0) {
    throw CodecError("corrupt payload: invalid quantization step");
  }
  if (std::size_t(blob.width) * std::size_t(blob.height) > (std::size_t{1} << 28)) {
    throw CodecError("corrupt payload: image geometry too large");
  }
  if (blob.payload.size() < 2) throw CodecError("corrupt payload: too short");
  const int n = blob.payload[0];
  const int weighting = blob.payload[1];
  if (!SupportedBlockSize(n) || weighting > 1) {
    throw CodecError("corrupt payload: bad stream parameters");
  }
  const std::vector<double> basis = n == block_size_ ? basis_ : DctBasis(n);
  const std::vector<int> zigzag = n == block_size_ ? zigzag_ : ZigZag(n);
  std::vector<double> weights;
  if (weighting == 0) {
    weights.assign(std::size_t(n) * n, 1.0);
  } else {
    weights = n == block_size_ && weighting_ == Weighting::kCsf ? weights_ : CsfWeightTable(n);
  }

  const int w = blob.width;
  const int h = blob.height;
  const int bw = (w + n - 1) / n;
  const int bh = (h + n - 1) / n;
  const std::size_t blocks = std::size_t(bw) * bh;
  // Worst case: every coefficient is a 5-byte run plus a 10-byte level.
  const std::size_t limit = blocks * (std::size_t(n) * n * 15 + 16);
  const Bytes symbols = Inflate(std::span(blob.payload).subspan(2), limit);
  SymbolReader reader(symbols);

  const double step = blob.param.value;
  const double shift = std::ldexp(1.0, blob.bit_depth - 1);
  const double max_value = std::ldexp(1.0, blob.bit_depth) - 1.0;
  std::vector<std::uint16_t> samples(std::size_t(w) * h);
  std::vector<double> coeff(std::size_t(n) * n);
  std::vector<double> block(std::size_t(n) * n);
  std::int64_t prev_dc = 0;

  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      std::fill(coeff.begin(), coeff.end(), 0.0);
      prev_dc += reader.Signed();
      coeff[zigzag[0]] = static_cast<double>(prev_dc) * step * weights[zigzag[0]];
      int pos = 1;
      for (;;) {
        const std::uint64_t token = reader.Varint();
        if (token == 0) break;
        if (token > static_cast<std::uint64_t>(n * n)) {
          throw CodecError("corrupt payload: zero run past end of block");
        }
        pos += static_cast<int>(token - 1);
        if (pos >= n * n) throw CodecError("corrupt payload: zero run past end of block");
        const std::int64_t level = reader.Signed();
        const int idx = zigzag[pos];
        coeff[idx] = static_cast<double>(level) * step * weights[idx];
        ++pos;
      }
      Transform2d(basis, n, coeff.data(), block.data(), /*inverse=*/true);
      for (int y = 0; y < n; ++y) {
        const int sy = by * n + y;
        if (sy >= h) break;
        for (int x = 0; x < n; ++x) {
          const int sx = bx * n + x;
          if (sx >= w) break;
          const double v = std::clamp(std::round(block[std::size_t(y) * n + x] + shift), 0.0, max_value);
          samples[std::size_t(sy) * w + sx] = static_cast<std::uint16_t>(v);
        }
      }
    }
  }
  if (!reader.AtEnd()) throw CodecError("corrupt payload: trailing symbols");
  return RasterImage(w, h, blob.bit_depth, std::move(samples));
}

}  // namespace qpress
