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

#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "qpress/codec.hpp"
#include "qpress/dct_codec.hpp"
#include "qpress/service.hpp"
#include "qpress/stub_codec.hpp"
#include "test_support.hpp"

namespace qpress {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

CodecRegistry Codecs() {
  CodecRegistry reg = CodecRegistry::WithBuiltins();
  StubOptions slow;
  slow.codec_id = "slow-stub";
  slow.delay = 60ms;
  reg.Add(std::make_shared<StubCodec>(ResponseProfile::Log2(60, -6, 1, 64), slow));
  reg.Add(std::make_shared<StubCodec>(ResponseProfile::Affine(60, -1, 1, 50)));
  return reg;
}

// A running service on an ephemeral port plus a client for it.
class Harness {
 public:
  explicit Harness(const std::filesystem::path& dir, int workers = 2)
      : service_(ServiceConfig{dir, workers}, Codecs()) {
    port_ = service_.Bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_.Listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
  }
  ~Harness() {
    service_.Stop();
    thread_.join();
  }
  httplib::Client& http() { return *client_; }
  Service& service() { return service_; }

  std::string Upload(const RasterImage& img) {
    const Bytes pgm = StorePgm(img);
    auto res = client_->Post("/api/images", std::string(pgm.begin(), pgm.end()),
                             "image/x-portable-graymap");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return json::parse(res->body)["image_id"];
  }
  std::string Submit(const json& spec) {
    auto res = client_->Post("/api/jobs", spec.dump(), "application/json");
    REQUIRE(res);
    REQUIRE_MESSAGE(res->status == 202, res->body);
    return json::parse(res->body)["job_id"];
  }
  json Poll(const std::string& id) {
    auto res = client_->Get("/api/jobs/" + id);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return json::parse(res->body);
  }
  json WaitDone(const std::string& id) {
    for (int i = 0; i < 3000; ++i) {
      json j = Poll(id);
      if (j["state"] == "done" || j["state"] == "failed") return j;
      std::this_thread::sleep_for(10ms);
    }
    FAIL("job did not finish");
    return {};
  }

 private:
  Service service_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_SUITE("service") {

TEST_CASE("image upload is content addressed") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const RasterImage img = testing::RandomImage(20, 10, 8, 3);
  const std::string a = h.Upload(img);
  const std::string b = h.Upload(img);
  CHECK(a == b);
  CHECK(a == Sha256Hex(StorePgm(img)));
  CHECK(a.size() == 64);
  CHECK(h.Upload(testing::RandomImage(20, 10, 8, 4)) != a);
}

TEST_CASE("malformed uploads are rejected with a diagnostic") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  auto res = h.http().Post("/api/images", std::string("P5\n2 2\n1023\nxxxxxxxx"), "text/plain");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(res->body.find("unsupported maxval") != std::string::npos);
  res = h.http().Post("/api/images", std::string("hello"), "text/plain");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("16-bit images round trip through the store") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const RasterImage img = testing::RandomImage(33, 17, 16, 5);
  const std::string id = h.Upload(img);
  auto res = h.http().Get("/api/images/" + id);
  REQUIRE(res);
  CHECK(res->status == 200);
  const Bytes got(res->body.begin(), res->body.end());
  CHECK(LoadPgm(got) == img);
  CHECK(got == StorePgm(img));
  res = h.http().Get("/api/images/" + std::string(64, 'a'));
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("raw cube upload stores every band") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const SpectralCube cube = testing::SyntheticCube(3, 16, 1);
  const RawBuffer raw = CubeToRaw(cube, ByteOrder::kBig);
  auto res = h.http().Post("/api/images/raw?width=16&height=16&bands=3&bit_depth=16&byte_order=big",
                           std::string(raw.bytes.begin(), raw.bytes.end()),
                           "application/octet-stream");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json ids = json::parse(res->body)["image_ids"];
  REQUIRE(ids.size() == 3);
  for (int b = 0; b < 3; ++b) {
    CHECK(h.service().images().Get(ids[b].get<std::string>()) == cube.band(b));
  }
  res = h.http().Post("/api/images/raw?width=16&height=16&bands=4&bit_depth=16",
                      std::string(raw.bytes.begin(), raw.bytes.end()), "application/octet-stream");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("finished job equals the library run") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const RasterImage img = testing::Crop(testing::LoadData("astronaut.pgm"), 128, 128);
  const std::string image_id = h.Upload(img);
  const std::string job = h.Submit({{"image_id", image_id},
                                    {"codec_id", "dct-m"},
                                    {"metric_id", "psnr_hvs_m"},
                                    {"target", 40.0},
                                    {"method", "interp"}});
  CHECK(job.rfind("job-", 0) == 0);
  const json snap = h.WaitDone(job);
  REQUIRE(snap["state"] == "done");

  const DctCodec codec(DctCodec::Weighting::kCsf);
  const ReportedRun lib =
      RunWithReport(SearchMethod::kInterpolate, img, codec, BuiltinMetrics().Get("psnr_hvs_m"),
                    {"psnr_hvs_m", 40.0, 0.1}, codec.DefaultRange(8));
  REQUIRE(lib.result);

  auto rep = h.http().Get("/api/jobs/" + job + "/artifacts/report");
  REQUIRE(rep);
  CHECK(ParseReport(rep->body) == lib.report);
  CHECK(ReportFromJson(snap["report"]) == lib.report);
  CHECK(snap["history"].size() == lib.report.history.size());

  auto blob = h.http().Get("/api/jobs/" + job + "/artifacts/blob");
  REQUIRE(blob);
  CHECK(Bytes(blob->body.begin(), blob->body.end()) == SerializeBlob(lib.result->blob));

  auto decoded = h.http().Get("/api/jobs/" + job + "/artifacts/decoded");
  REQUIRE(decoded);
  const RasterImage dec = LoadPgm(Bytes(decoded->body.begin(), decoded->body.end()));
  CHECK(dec.width() == img.width());
  CHECK(dec.height() == img.height());
  CHECK(dec == codec.Decompress(lib.result->blob));

  auto diff = h.http().Get("/api/jobs/" + job + "/artifacts/diff");
  REQUIRE(diff);
  REQUIRE(diff->has_header("X-Max-Diff"));
  const int max_diff = std::stoi(diff->get_header_value("X-Max-Diff"));
  CHECK(max_diff == testing::MaxAbsDiff(img, dec));
  CHECK(snap["max_diff"] == max_diff);
  const RasterImage d = LoadPgm(Bytes(diff->body.begin(), diff->body.end()));
  CHECK(d.bit_depth() == 8);
  CHECK(*std::max_element(d.samples().begin(), d.samples().end()) == 255);

  auto original = h.http().Get("/api/jobs/" + job + "/artifacts/original");
  REQUIRE(original);
  CHECK(Bytes(original->body.begin(), original->body.end()) == StorePgm(img));
}

TEST_CASE("identical reconstruction gives a flat diff") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const std::string id = h.Upload(RasterImage::Filled(48, 48, 8, 128));
  const std::string job = h.Submit(
      {{"image_id", id}, {"codec_id", "dct"}, {"metric_id", "psnr"}, {"target", 100.0}});
  const json snap = h.WaitDone(job);
  REQUIRE(snap["state"] == "done");
  CHECK(snap["max_diff"] == 0);
  auto diff = h.http().Get("/api/jobs/" + job + "/artifacts/diff");
  REQUIRE(diff);
  CHECK(diff->get_header_value("X-Max-Diff") == "0");
  const RasterImage d = LoadPgm(Bytes(diff->body.begin(), diff->body.end()));
  CHECK(d == RasterImage::Filled(48, 48, 8, 128));
}

TEST_CASE("infeasible job fails and cites the interval") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const std::string id = h.Upload(RasterImage::Filled(16, 16, 8, 0));
  const std::string job = h.Submit(
      {{"image_id", id}, {"codec_id", "stub"}, {"metric_id", "psnr"}, {"target", 5.0}});
  const json snap = h.WaitDone(job);
  CHECK(snap["state"] == "failed");
  CHECK(snap["error"].get<std::string>().find("[10, 59]") != std::string::npos);
  CHECK(snap["report"]["status"] == "infeasible");
  CHECK(snap["report"]["achievable"] == json::array({10.0, 59.0}));
  auto dec = h.http().Get("/api/jobs/" + job + "/artifacts/decoded");
  REQUIRE(dec);
  CHECK(dec->status == 409);
}

TEST_CASE("live history grows and artifacts conflict until done") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const std::string id = h.Upload(RasterImage::Filled(16, 16, 8, 0));
  const std::string job = h.Submit({{"image_id", id},
                                    {"codec_id", "slow-stub"},
                                    {"metric_id", "psnr"},
                                    {"target", 31.3},
                                    {"method", "bisect"}});
  auto early = h.http().Get("/api/jobs/" + job + "/artifacts/decoded");
  REQUIRE(early);
  CHECK(early->status == 409);
  auto early_diff = h.http().Get("/api/jobs/" + job + "/artifacts/diff");
  REQUIRE(early_diff);
  CHECK(early_diff->status == 409);

  std::size_t last = 0;
  std::set<std::size_t> lengths;
  std::string state;
  bool saw_running_with_history = false;
  for (int i = 0; i < 2000; ++i) {
    const json s = h.Poll(job);
    const std::size_t n = s["history"].size() + s["endpoint_probes"].size();
    CHECK(n >= last);
    last = n;
    lengths.insert(n);
    state = s["state"];
    if (state == "running" && !s["history"].empty()) saw_running_with_history = true;
    if (state == "done" || state == "failed") break;
    std::this_thread::sleep_for(15ms);
  }
  CHECK(state == "done");
  CHECK(saw_running_with_history);
  CHECK(lengths.size() >= 4);
}

TEST_CASE("request errors map to status codes") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const std::string id = h.Upload(RasterImage::Filled(16, 16, 8, 0));
  auto res = h.http().Get("/api/jobs/job-999999");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = h.http().Post("/api/jobs", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = h.http().Post("/api/jobs", json{{"image_id", id}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = h.http().Post("/api/jobs",
                      json{{"image_id", id}, {"codec_id", "nope"}, {"metric_id", "psnr"},
                           {"target", 40}}.dump(),
                      "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = h.http().Post("/api/jobs",
                      json{{"image_id", std::string(64, 'b')}, {"codec_id", "dct"},
                           {"metric_id", "psnr"}, {"target", 40}}.dump(),
                      "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = h.http().Post("/api/jobs",
                      json{{"image_id", id}, {"codec_id", "dct"}, {"metric_id", "psnr"},
                           {"target", 40}, {"tolerance", -1}}.dump(),
                      "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("estimate, codec and metric listings") {
  testing::ScratchDir dir;
  Harness h(dir.path());
  const std::string id = h.Upload(RasterImage::Filled(16, 16, 8, 0));
  auto res = h.http().Post(
      "/api/estimate",
      json{{"image_id", id}, {"codec_id", "stub"}, {"metric_id", "psnr"}}.dump(),
      "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json est = json::parse(res->body);
  CHECK(est["at_min"] == 59.0);
  CHECK(est["at_max"] == 10.0);
  CHECK(est["achievable"] == json::array({10.0, 59.0}));

  res = h.http().Get("/api/codecs");
  REQUIRE(res);
  const json codecs = json::parse(res->body);
  CHECK(codecs.size() == 4);
  CHECK(codecs[0]["codec_id"] == "dct");
  CHECK(codecs[0]["default_range"]["16"] == json::array({256.0, 16384.0}));

  res = h.http().Get("/api/metrics");
  REQUIRE(res);
  const json metrics = json::parse(res->body);
  CHECK(metrics.size() == 6);
  for (const json& m : metrics) {
    if (m["metric_id"] == "msssim") {
      CHECK(m["units"] == "unitless");
      CHECK(m["default_tolerance"] == 0.005);
    }
  }
}

TEST_CASE("restart keeps finished jobs and fails interrupted ones") {
  testing::ScratchDir dir;
  std::string done_job, queued_job, image_id;
  {
    Harness h(dir.path(), 1);
    image_id = h.Upload(RasterImage::Filled(16, 16, 8, 0));
    done_job = h.Submit(
        {{"image_id", image_id}, {"codec_id", "stub"}, {"metric_id", "psnr"}, {"target", 40.0}});
    h.WaitDone(done_job);
    // One worker: the second slow job waits behind the first.
    const json slow = {{"image_id", image_id}, {"codec_id", "slow-stub"},
                       {"metric_id", "psnr"}, {"target", 31.3}};
    h.Submit(slow);
    queued_job = h.Submit(slow);
  }
  Harness h(dir.path(), 1);
  const json done = h.Poll(done_job);
  CHECK(done["state"] == "done");
  CHECK(done["report"]["status"] == "converged");
  auto blob = h.http().Get("/api/jobs/" + done_job + "/artifacts/blob");
  REQUIRE(blob);
  CHECK(blob->status == 200);
  const json lost = h.Poll(queued_job);
  CHECK(lost["state"] == "failed");
  CHECK(lost["error"] == "interrupted by service restart");
  // New ids continue after the recovered ones.
  const std::string next = h.Submit(
      {{"image_id", image_id}, {"codec_id", "stub"}, {"metric_id", "psnr"}, {"target", 40.0}});
  CHECK(next > queued_job);
}

TEST_CASE("diff map scaling") {
  const RasterImage a(3, 1, 8, {0, 10, 20});
  const RasterImage b(3, 1, 8, {0, 15, 10});
  const DiffMap d = MakeDiffMap(a, b);
  CHECK(d.max_diff == 10);
  CHECK(std::vector<std::uint16_t>(d.display.samples().begin(), d.display.samples().end()) ==
        std::vector<std::uint16_t>{0, 128, 255});
}

}  // TEST_SUITE

}  // namespace
}  // namespace qpress
