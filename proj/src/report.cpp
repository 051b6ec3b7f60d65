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

#include "qpress/report.hpp"

#include <cstdio>

#include "qpress/error.hpp"

namespace qpress {

using nlohmann::json;

namespace {

json ProbesToJson(const std::vector<Probe>& probes) {
  json a = json::array();
  for (const Probe& p : probes) a.push_back({{"param", p.param}, {"value", p.value}});
  return a;
}

std::vector<Probe> ProbesFromJson(const json& a) {
  std::vector<Probe> out;
  for (const json& e : a) {
    out.push_back({e.at("param").get<double>(), e.at("value").get<double>()});
  }
  return out;
}

template <typename T>
std::optional<T> Optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string Fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

SearchReport MakeReport(const SearchResult& result, std::string_view codec_id,
                        const QualityTarget& target, SearchMethod method) {
  SearchReport r;
  r.codec_id = codec_id;
  r.metric_id = target.metric_id;
  r.target = target.value;
  r.tolerance = target.tolerance;
  r.method = method;
  r.status = SearchStatusName(result.status);
  r.range = result.range;
  r.achievable_low = result.span.low;
  r.achievable_high = result.span.high;
  r.achieved = result.achieved.value;
  r.final_param = result.final_param;
  r.iterations = result.iterations;
  r.history = result.history;
  r.endpoint_probes = result.endpoint_probes;
  r.cr = result.cr;
  r.bpp = result.bpp;
  return r;
}

SearchReport MakeInfeasibleReport(const InfeasibleTarget& error,
                                  std::string_view codec_id,
                                  const QualityTarget& target,
                                  const ParameterRange& range,
                                  SearchMethod method) {
  SearchReport r;
  r.codec_id = codec_id;
  r.metric_id = target.metric_id;
  r.target = target.value;
  r.tolerance = target.tolerance;
  r.method = method;
  r.status = "infeasible";
  r.range = range;
  r.achievable_low = error.span().low;
  r.achievable_high = error.span().high;
  r.endpoint_probes = {{range.min, error.span().at_min.value},
                       {range.max, error.span().at_max.value}};
  r.error = error.what();
  return r;
}

json ReportToJson(const SearchReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["codec_id"] = r.codec_id;
  j["metric_id"] = r.metric_id;
  j["target"] = r.target;
  j["tolerance"] = r.tolerance;
  j["method"] = SearchMethodName(r.method);
  j["status"] = r.status;
  j["range"] = {{"kind", ParamKindName(r.range.kind)},
                {"min", r.range.min},
                {"max", r.range.max}};
  j["achievable"] = r.achievable_low && r.achievable_high
                        ? json::array({*r.achievable_low, *r.achievable_high})
                        : json(nullptr);
  j["achieved"] = r.achieved ? json(*r.achieved) : json(nullptr);
  j["final_param"] =
      r.final_param ? json{{"kind", ParamKindName(r.final_param->kind)},
                           {"value", r.final_param->value}}
                    : json(nullptr);
  j["iterations"] = r.iterations;
  j["history"] = ProbesToJson(r.history);
  j["endpoint_probes"] = ProbesToJson(r.endpoint_probes);
  j["cr"] = r.cr ? json(*r.cr) : json(nullptr);
  j["bpp"] = r.bpp ? json(*r.bpp) : json(nullptr);
  if (r.error) j["error"] = *r.error;
  return j;
}

SearchReport ReportFromJson(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kReportSchema) {
      throw FormatError("unsupported report schema");
    }
    SearchReport r;
    r.codec_id = j.at("codec_id").get<std::string>();
    r.metric_id = j.at("metric_id").get<std::string>();
    r.target = j.at("target").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.method = ParseSearchMethod(j.at("method").get<std::string>());
    r.status = j.at("status").get<std::string>();
    if (r.status != "infeasible") ParseSearchStatus(r.status);
    const json& range = j.at("range");
    r.range = {ParseParamKind(range.at("kind").get<std::string>()),
               range.at("min").get<double>(), range.at("max").get<double>()};
    if (const json& a = j.at("achievable"); !a.is_null()) {
      if (a.size() != 2) throw FormatError("achievable must have two entries");
      r.achievable_low = a[0].get<double>();
      r.achievable_high = a[1].get<double>();
    }
    r.achieved = Optional<double>(j, "achieved");
    if (const json& fp = j.at("final_param"); !fp.is_null()) {
      r.final_param = ControlParameter{
          ParseParamKind(fp.at("kind").get<std::string>()),
          fp.at("value").get<double>()};
    }
    r.iterations = j.at("iterations").get<int>();
    r.history = ProbesFromJson(j.at("history"));
    r.endpoint_probes = ProbesFromJson(j.at("endpoint_probes"));
    r.cr = Optional<double>(j, "cr");
    r.bpp = Optional<double>(j, "bpp");
    r.error = Optional<std::string>(j, "error");
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string SerializeReport(const SearchReport& report) {
  return ReportToJson(report).dump(2) + "\n";
}

SearchReport ParseReport(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
  return ReportFromJson(j);
}

std::string SummaryLine(const SearchReport& r) {
  std::string s = "status=" + r.status + " metric=" + r.metric_id +
                  " target=" + Fixed4(r.target);
  if (r.achieved) s += " achieved=" + Fixed4(*r.achieved);
  s += " iterations=" + std::to_string(r.iterations);
  if (r.final_param) s += " param=" + Fixed4(r.final_param->value);
  if (r.cr) s += " cr=" + Fixed4(*r.cr);
  if (r.bpp) s += " bpp=" + Fixed4(*r.bpp);
  if (r.achievable_low && r.achievable_high) {
    s += " achievable=[" + Fixed4(*r.achievable_low) + "," +
         Fixed4(*r.achievable_high) + "]";
  }
  return s;
}

ReportedRun RunWithReport(SearchMethod method, const SearchProblem& problem,
                          std::string_view codec_id, const QualityTarget& target,
                          const SearchOptions& options) {
  ReportedRun run;
  try {
    run.result = RunSearch(method, problem, target, options);
  } catch (const InfeasibleTarget& e) {
    run.report = MakeInfeasibleReport(e, codec_id, target, problem.range, method);
    return run;
  }
  run.report = MakeReport(*run.result, codec_id, target, method);
  return run;
}

ReportedRun RunWithReport(SearchMethod method, const RasterImage& image,
                          const Codec& codec, const Metric& metric,
                          const QualityTarget& target, const ParameterRange& range,
                          const SearchOptions& options) {
  return RunWithReport(method, MakeProblem(image, codec, metric, range),
                       codec.id(), target, options);
}

}  // namespace qpress
