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

// The codec contract: lossy compression driven by one scalar parameter.

#ifndef QPRESS_CODEC_HPP_
#define QPRESS_CODEC_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpress/blob.hpp"
#include "qpress/image.hpp"
#include "qpress/metrics.hpp"

namespace qpress {

enum class QualityDirection {
  kMetricDecreasesWithParam,  // quantization step / scaling factor
  kMetricIncreasesWithParam,  // bits per pixel
};

std::string_view QualityDirectionName(QualityDirection d);
QualityDirection ParseQualityDirection(std::string_view name);
// The direction a parameter kind implies.
QualityDirection DirectionForKind(ParamKind kind);

struct CodecDescriptor {
  std::string codec_id;
  ParamKind param_kind = ParamKind::kQuantizationStep;
  ParameterRange default_range;
  QualityDirection quality_direction =
      QualityDirection::kMetricDecreasesWithParam;
};

// Implementations are immutable after construction; Compress and Decompress
// may be called concurrently.
class Codec {
 public:
  virtual ~Codec() = default;

  virtual const CodecDescriptor& descriptor() const = 0;
  const std::string& id() const { return descriptor().codec_id; }

  // Deterministic: identical (image, param) give byte-identical blobs.
  virtual CompressedBlob Compress(const RasterImage& image,
                                  ControlParameter param) const = 0;
  // Throws CodecError on corrupt payloads or foreign blobs.
  virtual RasterImage Decompress(const CompressedBlob& blob) const = 0;

  // Search interval suited to images of the given bit depth.
  virtual ParameterRange DefaultRange(int bit_depth) const;

  // Test doubles may measure a metric themselves instead of through the
  // registry evaluator. Real codecs return nullopt.
  virtual std::optional<Metric> MetricOverride(std::string_view metric_id) const;

 protected:
  // Throws InvalidArgument unless `param` has a kind this codec accepts.
  void CheckParamKind(const ControlParameter& param) const;
};

using CodecPtr = std::shared_ptr<const Codec>;

class CodecRegistry {
 public:
  // "dct" (plain 16x16 block DCT) and "dct-m" (CSF-weighted variant).
  static CodecRegistry WithBuiltins();

  void Add(CodecPtr codec);
  // Throws InvalidArgument for unknown ids.
  CodecPtr Get(std::string_view id) const;
  bool Contains(std::string_view id) const;
  std::vector<std::string> Ids() const;

 private:
  std::map<std::string, CodecPtr, std::less<>> codecs_;
};

// Resolves the evaluator for `metric_id`, honouring codec overrides.
Metric ResolveMetric(const Codec& codec, const MetricRegistry& metrics,
                     std::string_view metric_id);

}  // namespace qpress

#endif  // QPRESS_CODEC_HPP_
