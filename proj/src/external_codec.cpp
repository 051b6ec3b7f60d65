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

#include "qpress/external_codec.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <system_error>

#include "qpress/error.hpp"

namespace qpress {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxDiagnostic = 4096;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double ParseDouble(std::string_view key, std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("codec config: bad number for " + std::string(key) + ": '" +
                      std::string(s) + "'");
  }
  return v;
}

std::string ShellQuote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string FormatParam(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Expand(std::string_view tmpl, const fs::path& in, const fs::path& out,
                   double param) {
  std::string s;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.substr(i, 4) == "{in}") {
      s += ShellQuote(in.string());
      i += 4;
    } else if (tmpl.substr(i, 5) == "{out}") {
      s += ShellQuote(out.string());
      i += 5;
    } else if (tmpl.substr(i, 7) == "{param}") {
      s += FormatParam(param);
      i += 7;
    } else {
      s += tmpl[i++];
    }
  }
  return s;
}

// First whitespace-separated word of a command template.
std::string Program(std::string_view cmd) {
  cmd = Trim(cmd);
  if (!cmd.empty() && (cmd.front() == '\'' || cmd.front() == '"')) {
    // Quoted program path, as the shell will see it.
    const std::size_t close = cmd.find(cmd.front(), 1);
    if (close != std::string_view::npos) return std::string(cmd.substr(1, close - 1));
  }
  const std::size_t end = cmd.find_first_of(" \t");
  return std::string(cmd.substr(0, end));
}

bool IsExecutable(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

bool ToolExists(const std::string& program) {
  if (program.empty()) return false;
  if (program.find('/') != std::string::npos) return IsExecutable(program);
  const char* path = std::getenv("PATH");
  std::string_view dirs = path ? path : "/usr/bin:/bin";
  while (true) {
    const std::size_t colon = dirs.find(':');
    const std::string_view dir = dirs.substr(0, colon);
    if (!dir.empty() && IsExecutable(fs::path(dir) / program)) return true;
    if (colon == std::string_view::npos) return false;
    dirs.remove_prefix(colon + 1);
  }
}

// Private directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (TempRoot() / "qpress-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw IoError("cannot create temporary directory under " +
                    TempRoot().string());
    }
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Runs `cmd` through the shell; throws CodecError with the combined
// stdout/stderr text on a nonzero exit.
void RunCommand(const std::string& what, const std::string& cmd) {
  const std::string full = cmd + " 2>&1";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (pipe == nullptr) throw CodecError(what + ": cannot start command");
  std::string output;
  char buf[512];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    if (output.size() < kMaxDiagnostic) output.append(buf, n);
  }
  const int status = ::pclose(pipe);
  if (status != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    while (!output.empty() && (output.back() == '\n' || output.back() == '\r')) {
      output.pop_back();
    }
    throw CodecError(what + " failed (exit " + std::to_string(code) + "): " +
                     output);
  }
}

Bytes ReadOutput(const std::string& what, const fs::path& p) {
  std::error_code ec;
  if (!fs::exists(p, ec)) throw CodecError(what + " produced no output file");
  return ReadFile(p);
}

}  // namespace

fs::path TempRoot() {
  if (const char* env = std::getenv("QPRESS_TMPDIR"); env && *env) return env;
  return fs::temp_directory_path();
}

ExternalCodecConfig ParseExternalCodecConfig(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos &&
                                                 Trim(line.substr(0, hash)).empty()) {
      continue;
    }
    line = Trim(line);
    if (line.empty()) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw FormatError("codec config: expected 'key: value', got '" +
                        std::string(line) + "'");
    }
    const std::string key(Trim(line.substr(0, colon)));
    if (kv.count(key)) throw FormatError("codec config: duplicate key " + key);
    kv[key] = std::string(Trim(line.substr(colon + 1)));
  }

  auto take = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw FormatError(std::string("codec config: missing ") + key);
      return std::nullopt;
    }
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  ExternalCodecConfig c;
  c.codec_id = *take("codec_id", true);
  c.encode_cmd = *take("encode_cmd", true);
  c.decode_cmd = *take("decode_cmd", true);
  try {
    c.range.kind = ParseParamKind(*take("param_kind", true));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("codec config: ") + e.what());
  }
  c.range.min = ParseDouble("param_min", *take("param_min", true));
  c.range.max = ParseDouble("param_max", *take("param_max", true));
  c.quality_direction = DirectionForKind(c.range.kind);
  if (auto d = take("quality_direction", false)) {
    try {
      c.quality_direction = ParseQualityDirection(*d);
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("codec config: ") + e.what());
    }
  }
  if (auto o = take("output", false)) {
    if (*o == "container") {
      c.container_output = true;
    } else if (*o != "payload") {
      throw FormatError("codec config: output must be payload or container");
    }
  }
  if (!kv.empty()) {
    throw FormatError("codec config: unknown key " + kv.begin()->first);
  }
  if (c.codec_id.empty() || c.codec_id.size() > 255) {
    throw FormatError("codec config: codec_id must be 1..255 characters");
  }
  for (const std::string* cmd : {&c.encode_cmd, &c.decode_cmd}) {
    if (cmd->find("{in}") == std::string::npos ||
        cmd->find("{out}") == std::string::npos) {
      throw FormatError("codec config: commands need {in} and {out}");
    }
  }
  c.range.Validate();
  if (c.quality_direction != DirectionForKind(c.range.kind)) {
    throw InvalidArgument("codec config: " +
                          std::string(QualityDirectionName(c.quality_direction)) +
                          " contradicts " +
                          std::string(ParamKindName(c.range.kind)));
  }
  return c;
}

ExternalCodec::ExternalCodec(ExternalCodecConfig config)
    : config_(std::move(config)) {
  for (const std::string* cmd : {&config_.encode_cmd, &config_.decode_cmd}) {
    const std::string prog = Program(*cmd);
    if (!ToolExists(prog)) throw CodecError("tool not found: " + prog);
  }
  descriptor_.codec_id = config_.codec_id;
  descriptor_.param_kind = config_.range.kind;
  descriptor_.default_range = config_.range;
  descriptor_.quality_direction = config_.quality_direction;
}

CompressedBlob ExternalCodec::Compress(const RasterImage& image,
                                       ControlParameter param) const {
  CheckParamKind(param);
  TempDir dir;
  const fs::path in = dir.path() / "input.pgm";
  const fs::path out = dir.path() / "output.bin";
  WriteFileAtomic(in, StorePgm(image));
  RunCommand("encode command", Expand(config_.encode_cmd, in, out, param.value));
  Bytes bytes = ReadOutput("encode command", out);

  if (config_.container_output) {
    CompressedBlob blob;
    try {
      blob = ParseBlob(bytes);
    } catch (const FormatError& e) {
      throw CodecError(std::string("encoder output is not a container: ") + e.what());
    }
    if (blob.codec_id != config_.codec_id || blob.width != image.width() ||
        blob.height != image.height() || blob.bit_depth != image.bit_depth()) {
      throw CodecError("encoder container does not match codec or image");
    }
    return blob;
  }
  CompressedBlob blob;
  blob.codec_id = config_.codec_id;
  blob.param = {descriptor_.param_kind, param.value};
  blob.width = image.width();
  blob.height = image.height();
  blob.bit_depth = image.bit_depth();
  blob.backend = EntropyBackend::kNone;
  blob.payload = std::move(bytes);
  if (blob.payload.empty()) throw CodecError("encode command wrote an empty file");
  return blob;
}

RasterImage ExternalCodec::Decompress(const CompressedBlob& blob) const {
  if (blob.codec_id != config_.codec_id) {
    throw CodecError("blob codec '" + blob.codec_id + "' is not '" +
                     config_.codec_id + "'");
  }
  TempDir dir;
  const fs::path in = dir.path() / "input.bin";
  const fs::path out = dir.path() / "output.pgm";
  WriteFileAtomic(in, config_.container_output ? SerializeBlob(blob) : blob.payload);
  RunCommand("decode command", Expand(config_.decode_cmd, in, out, blob.param.value));
  RasterImage image;
  try {
    image = LoadPgm(ReadOutput("decode command", out));
  } catch (const FormatError& e) {
    throw CodecError(std::string("decoder output: ") + e.what());
  }
  if (image.width() != blob.width || image.height() != blob.height ||
      image.bit_depth() != blob.bit_depth) {
    throw CodecError("decoder output geometry does not match the blob header");
  }
  return image;
}

CodecPtr LoadExternalCodec(const fs::path& config_path) {
  const Bytes bytes = ReadFile(config_path);
  return std::make_shared<ExternalCodec>(ParseExternalCodecConfig(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
}

}  // namespace qpress
