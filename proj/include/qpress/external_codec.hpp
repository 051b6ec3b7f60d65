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

// Codec that shells out to external encode/decode commands.

#ifndef QPRESS_EXTERNAL_CODEC_HPP_
#define QPRESS_EXTERNAL_CODEC_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "qpress/codec.hpp"

namespace qpress {

// Config file, one "key: value" per line, '#' starts a comment:
//
//   codec_id: j2k
//   encode_cmd: opj_compress -i {in} -o {out} -r {param}
//   decode_cmd: opj_decompress -i {in} -o {out}
//   param_kind: quantization_step | scaling_factor | bits_per_pixel
//   param_min: 1
//   param_max: 64
//   quality_direction: metric_decreases_with_param   (optional)
//   output: payload | container                      (optional)
//
// {in} and {out} expand to shell-quoted temporary paths, {param} to the
// shortest decimal that round-trips the parameter. The encoder reads a PGM
// and writes either an opaque payload or a complete container; the decoder
// reads that file and writes a PGM.
struct ExternalCodecConfig {
  std::string codec_id;
  std::string encode_cmd;
  std::string decode_cmd;
  ParameterRange range;
  QualityDirection quality_direction = QualityDirection::kMetricDecreasesWithParam;
  bool container_output = false;
};

// Throws FormatError on unknown keys or bad values, InvalidArgument when the
// declared direction contradicts the parameter kind.
ExternalCodecConfig ParseExternalCodecConfig(std::string_view text);

class ExternalCodec final : public Codec {
 public:
  // Throws CodecError("tool not found: ...") if either command's program
  // cannot be resolved.
  explicit ExternalCodec(ExternalCodecConfig config);

  const CodecDescriptor& descriptor() const override { return descriptor_; }
  CompressedBlob Compress(const RasterImage& image,
                          ControlParameter param) const override;
  RasterImage Decompress(const CompressedBlob& blob) const override;

  const ExternalCodecConfig& config() const { return config_; }

 private:
  ExternalCodecConfig config_;
  CodecDescriptor descriptor_;
};

CodecPtr LoadExternalCodec(const std::filesystem::path& config_path);

// Temp directory root: $QPRESS_TMPDIR if set, else the system default.
std::filesystem::path TempRoot();

}  // namespace qpress

#endif  // QPRESS_EXTERNAL_CODEC_HPP_
