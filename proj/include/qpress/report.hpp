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

// Machine-readable search reports (JSON), shared by the CLI and the service.

#ifndef QPRESS_REPORT_HPP_
#define QPRESS_REPORT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qpress/search.hpp"

namespace qpress {

inline constexpr std::string_view kReportSchema = "qpress.report/1";

struct SearchReport {
  std::string codec_id;
  std::string metric_id;
  double target = 0.0;
  double tolerance = 0.0;
  SearchMethod method = SearchMethod::kInterpolate;
  // A SearchStatusName, or "infeasible".
  std::string status;
  ParameterRange range;
  // Both present unless the endpoint probes failed.
  std::optional<double> achievable_low;
  std::optional<double> achievable_high;
  // Absent when infeasible.
  std::optional<double> achieved;
  std::optional<ControlParameter> final_param;
  int iterations = 0;
  std::vector<Probe> history;
  std::vector<Probe> endpoint_probes;
  std::optional<double> cr;
  std::optional<double> bpp;
  std::optional<std::string> error;

  friend bool operator==(const SearchReport&, const SearchReport&) = default;
};

SearchReport MakeReport(const SearchResult& result, std::string_view codec_id,
                        const QualityTarget& target, SearchMethod method);
SearchReport MakeInfeasibleReport(const InfeasibleTarget& error,
                                  std::string_view codec_id,
                                  const QualityTarget& target,
                                  const ParameterRange& range,
                                  SearchMethod method);

nlohmann::json ReportToJson(const SearchReport& report);
// Throws FormatError on schema violations.
SearchReport ReportFromJson(const nlohmann::json& json);
// Pretty-printed, doubles at full round-trip precision.
std::string SerializeReport(const SearchReport& report);
SearchReport ParseReport(std::string_view text);

// key=value summary line, stable field order.
std::string SummaryLine(const SearchReport& report);

// A search plus its report. Infeasible targets do not throw: the report
// says "infeasible" and result is empty. Other errors propagate.
struct ReportedRun {
  std::optional<SearchResult> result;
  SearchReport report;
};
ReportedRun RunWithReport(SearchMethod method, const SearchProblem& problem,
                          std::string_view codec_id, const QualityTarget& target,
                          const SearchOptions& options = {});
ReportedRun RunWithReport(SearchMethod method, const RasterImage& image,
                          const Codec& codec, const Metric& metric,
                          const QualityTarget& target, const ParameterRange& range,
                          const SearchOptions& options = {});

}  // namespace qpress

#endif  // QPRESS_REPORT_HPP_
