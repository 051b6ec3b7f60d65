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

#include "qpress/codec.hpp"

#include <utility>

#include "qpress/dct_codec.hpp"
#include "qpress/error.hpp"

namespace qpress {

namespace {

bool IsStepKind(ParamKind k) {
  return k == ParamKind::kQuantizationStep || k == ParamKind::kScalingFactor;
}

}  // namespace

std::string_view QualityDirectionName(QualityDirection d) {
  return d == QualityDirection::kMetricDecreasesWithParam
             ? "metric_decreases_with_param"
             : "metric_increases_with_param";
}

QualityDirection ParseQualityDirection(std::string_view name) {
  if (name == "metric_decreases_with_param") {
    return QualityDirection::kMetricDecreasesWithParam;
  }
  if (name == "metric_increases_with_param") {
    return QualityDirection::kMetricIncreasesWithParam;
  }
  throw InvalidArgument("unknown quality direction '" + std::string(name) + "'");
}

QualityDirection DirectionForKind(ParamKind kind) {
  return kind == ParamKind::kBitsPerPixel
             ? QualityDirection::kMetricIncreasesWithParam
             : QualityDirection::kMetricDecreasesWithParam;
}

ParameterRange Codec::DefaultRange(int /*bit_depth*/) const {
  return descriptor().default_range;
}

std::optional<Metric> Codec::MetricOverride(std::string_view) const {
  return std::nullopt;
}

void Codec::CheckParamKind(const ControlParameter& param) const {
  const ParamKind own = descriptor().param_kind;
  const bool ok = param.kind == own || (IsStepKind(param.kind) && IsStepKind(own));
  if (!ok) {
    throw InvalidArgument("codec '" + id() + "' is driven by " +
                          std::string(ParamKindName(own)) + ", got " +
                          std::string(ParamKindName(param.kind)));
  }
  param.Validate();
}

CodecRegistry CodecRegistry::WithBuiltins() {
  CodecRegistry r;
  r.Add(std::make_shared<DctCodec>(DctCodec::Weighting::kFlat));
  r.Add(std::make_shared<DctCodec>(DctCodec::Weighting::kCsf));
  return r;
}

void CodecRegistry::Add(CodecPtr codec) {
  if (!codec) throw InvalidArgument("null codec");
  std::string id = codec->id();
  codecs_.insert_or_assign(std::move(id), std::move(codec));
}

CodecPtr CodecRegistry::Get(std::string_view id) const {
  const auto it = codecs_.find(id);
  if (it == codecs_.end()) {
    throw InvalidArgument("unknown codec id '" + std::string(id) + "'");
  }
  return it->second;
}

bool CodecRegistry::Contains(std::string_view id) const {
  return codecs_.find(id) != codecs_.end();
}

std::vector<std::string> CodecRegistry::Ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, c] : codecs_) ids.push_back(id);
  return ids;
}

Metric ResolveMetric(const Codec& codec, const MetricRegistry& metrics,
                     std::string_view metric_id) {
  if (auto m = codec.MetricOverride(metric_id)) return *std::move(m);
  return metrics.Get(metric_id);
}

}  // namespace qpress
