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

#include "qpress/image.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include "qpress/error.hpp"

namespace qpress {

namespace {

void CheckDepth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InvalidArgument("bit depth must be 8 or 16, got " +
                          std::to_string(bit_depth));
  }
}

// Minimal cursor over a PGM header.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void SkipWhitespaceAndComments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long ReadNumber(const char* what) {
    SkipWhitespaceAndComments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) {
        throw FormatError(std::string("PGM header: ") + what + " too large");
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw FormatError(std::string("PGM header: malformed ") + what);
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  void Advance(std::size_t n) { pos_ += n; }
  bool AtEnd() const { return pos_ >= bytes_.size(); }
  std::uint8_t Peek() const { return bytes_[pos_]; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

int ParsePositiveInt(const std::string& key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || out <= 0) {
    throw FormatError("RAW descriptor: invalid value for '" + key + "': '" +
                      value + "'");
  }
  return out;
}

}  // namespace

RasterImage::RasterImage(int width, int height, int bit_depth,
                         std::vector<std::uint16_t> samples)
    : width_(width),
      height_(height),
      bit_depth_(bit_depth),
      samples_(std::move(samples)) {
  CheckDepth(bit_depth);
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image dimensions must be positive");
  }
  if (samples_.size() !=
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("sample count does not match width x height");
  }
  if (bit_depth == 8) {
    const bool ok = std::all_of(samples_.begin(), samples_.end(),
                                [](std::uint16_t v) { return v < 256; });
    if (!ok) throw InvalidArgument("8-bit image has a sample above 255");
  }
}

RasterImage RasterImage::Filled(int width, int height, int bit_depth,
                                std::uint16_t value) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image dimensions must be positive");
  }
  return RasterImage(
      width, height, bit_depth,
      std::vector<std::uint16_t>(static_cast<std::size_t>(width) * height,
                                 value));
}

SpectralCube::SpectralCube(std::vector<RasterImage> bands,
                           std::vector<std::string> labels)
    : bands_(std::move(bands)), labels_(std::move(labels)) {
  if (bands_.empty()) throw InvalidArgument("cube needs at least one band");
  for (const RasterImage& b : bands_) {
    if (b.empty()) throw InvalidArgument("cube band is empty");
    if (!b.same_shape(bands_.front())) {
      throw InvalidArgument(
          "cube bands must share width, height and bit depth");
    }
  }
  if (!labels_.empty() && labels_.size() != bands_.size()) {
    throw InvalidArgument("band label count does not match band count");
  }
}

RasterImage LoadPgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM file (missing P5 magic)");
  }
  HeaderReader reader(bytes);
  reader.Advance(2);
  const long width = reader.ReadNumber("width");
  const long height = reader.ReadNumber("height");
  const long maxval = reader.ReadNumber("maxval");
  if (width <= 0 || height <= 0) throw FormatError("PGM has zero dimension");
  if (maxval != 255 && maxval != 65535) {
    throw FormatError("unsupported maxval " + std::to_string(maxval) +
                      " (expected 255 or 65535)");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (reader.AtEnd() || !std::isspace(reader.Peek())) {
    throw FormatError("PGM header not terminated by whitespace");
  }
  reader.Advance(1);

  const int depth = maxval == 255 ? 8 : 16;
  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t need = count * (depth / 8);
  if (bytes.size() - reader.pos() < need) {
    throw FormatError("truncated PGM payload: need " + std::to_string(need) +
                      " bytes, have " +
                      std::to_string(bytes.size() - reader.pos()));
  }
  std::vector<std::uint16_t> samples(count);
  const std::uint8_t* p = bytes.data() + reader.pos();
  if (depth == 8) {
    std::copy(p, p + count, samples.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      samples[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    }
  }
  return RasterImage(static_cast<int>(width), static_cast<int>(height), depth,
                     std::move(samples));
}

Bytes StorePgm(const RasterImage& image) {
  if (image.empty()) throw InvalidArgument("cannot store an empty image");
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n" +
                             std::to_string(image.max_value()) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + image.raw_bytes());
  for (std::uint16_t v : image.samples()) {
    if (image.bit_depth() == 16) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

std::size_t RawDescriptor::expected_bytes() const {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
         static_cast<std::size_t>(bands) *
         static_cast<std::size_t>(bit_depth / 8);
}

RawDescriptor ParseRawDescriptor(std::string_view text) {
  RawDescriptor d;
  bool have_width = false;
  bool have_height = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (Trim(line).empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw FormatError("RAW descriptor line " + std::to_string(line_no) +
                        ": expected 'key: value'");
    }
    const std::string key = Trim(std::string_view(line).substr(0, colon));
    const std::string value = Trim(std::string_view(line).substr(colon + 1));
    if (key == "width") {
      d.width = ParsePositiveInt(key, value);
      have_width = true;
    } else if (key == "height") {
      d.height = ParsePositiveInt(key, value);
      have_height = true;
    } else if (key == "bands") {
      d.bands = ParsePositiveInt(key, value);
    } else if (key == "bit_depth") {
      d.bit_depth = ParsePositiveInt(key, value);
      if (d.bit_depth != 8 && d.bit_depth != 16) {
        throw FormatError("RAW descriptor: bit_depth must be 8 or 16");
      }
    } else if (key == "byte_order") {
      if (value == "little") {
        d.byte_order = ByteOrder::kLittle;
      } else if (value == "big") {
        d.byte_order = ByteOrder::kBig;
      } else {
        throw FormatError("RAW descriptor: byte_order must be little or big");
      }
    } else if (key == "layout") {
      if (value != "band_sequential") {
        throw FormatError("RAW descriptor: only band_sequential layout is "
                          "supported, got '" + value + "'");
      }
    } else {
      throw FormatError("RAW descriptor: unknown key '" + key + "'");
    }
  }
  if (!have_width || !have_height) {
    throw FormatError("RAW descriptor: width and height are required");
  }
  return d;
}

std::string FormatRawDescriptor(const RawDescriptor& d) {
  std::ostringstream out;
  out << "width: " << d.width << "\n"
      << "height: " << d.height << "\n"
      << "bands: " << d.bands << "\n"
      << "bit_depth: " << d.bit_depth << "\n"
      << "byte_order: "
      << (d.byte_order == ByteOrder::kLittle ? "little" : "big") << "\n"
      << "layout: band_sequential\n";
  return out.str();
}

SpectralCube LoadRaw(std::span<const std::uint8_t> bytes,
                     const RawDescriptor& d) {
  CheckDepth(d.bit_depth);
  if (d.width <= 0 || d.height <= 0 || d.bands <= 0) {
    throw FormatError("RAW descriptor has non-positive dimensions");
  }
  if (bytes.size() != d.expected_bytes()) {
    throw FormatError("RAW size mismatch: descriptor " +
                      std::to_string(d.width) + "x" + std::to_string(d.height) +
                      "x" + std::to_string(d.bands) + " at " +
                      std::to_string(d.bit_depth) + " bits needs " +
                      std::to_string(d.expected_bytes()) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  const std::size_t per_band = static_cast<std::size_t>(d.width) * d.height;
  const std::size_t stride = d.bit_depth / 8;
  std::vector<RasterImage> bands;
  bands.reserve(d.bands);
  for (int b = 0; b < d.bands; ++b) {
    std::vector<std::uint16_t> samples(per_band);
    const std::uint8_t* p = bytes.data() + b * per_band * stride;
    for (std::size_t i = 0; i < per_band; ++i) {
      if (stride == 1) {
        samples[i] = p[i];
      } else if (d.byte_order == ByteOrder::kLittle) {
        samples[i] = static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
      } else {
        samples[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
      }
    }
    bands.emplace_back(d.width, d.height, d.bit_depth, std::move(samples));
  }
  return SpectralCube(std::move(bands));
}

RawBuffer CubeToRaw(const SpectralCube& cube, ByteOrder byte_order) {
  RawBuffer out;
  out.descriptor.width = cube.width();
  out.descriptor.height = cube.height();
  out.descriptor.bands = static_cast<int>(cube.band_count());
  out.descriptor.bit_depth = cube.bit_depth();
  out.descriptor.byte_order = byte_order;
  out.bytes.reserve(out.descriptor.expected_bytes());
  for (const RasterImage& band : cube.bands()) {
    for (std::uint16_t v : band.samples()) {
      const auto lo = static_cast<std::uint8_t>(v & 0xff);
      const auto hi = static_cast<std::uint8_t>(v >> 8);
      if (cube.bit_depth() == 8) {
        out.bytes.push_back(lo);
      } else if (byte_order == ByteOrder::kLittle) {
        out.bytes.push_back(lo);
        out.bytes.push_back(hi);
      } else {
        out.bytes.push_back(hi);
        out.bytes.push_back(lo);
      }
    }
  }
  return out;
}

Bytes ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes out((std::istreambuf_iterator<char>(in)),
            std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return out;
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  static std::atomic<unsigned> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view text) {
  WriteFileAtomic(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

}  // namespace qpress
