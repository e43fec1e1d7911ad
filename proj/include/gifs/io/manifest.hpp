#pragma once

#include <array>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "gifs/io/csv.hpp"

namespace gifs::io {

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

struct OutputRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
};

/// Record of one CLI run: what was computed, from which inputs, and the
/// certified bounds that accompany the outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;  // full argument list after the program name
  std::string spec_path;
  std::string spec_sha256;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  nlohmann::ordered_json bounds = nlohmann::ordered_json::object();
  std::vector<OutputRecord> outputs;
  std::string status;
  int exit_code = 0;
  std::vector<std::string> notes;
  double wall_clock_seconds = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["argv"] = argv;
    if (!spec_path.empty()) {
      j["spec"] = {{"path", spec_path}, {"sha256", spec_sha256}};
    }
    j["parameters"] = parameters;
    j["bounds"] = bounds;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : outputs) j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}});
    j["status"] = status;
    j["exit_code"] = exit_code;
    j["notes"] = notes;
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
  }

  static RunManifest from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    if (j.contains("spec")) {
      m.spec_path = j["spec"].at("path").get<std::string>();
      m.spec_sha256 = j["spec"].at("sha256").get<std::string>();
    }
    m.parameters = nlohmann::ordered_json::parse(j.at("parameters").dump());
    m.bounds = nlohmann::ordered_json::parse(j.at("bounds").dump());
    for (const auto& o : j.at("outputs"))
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    m.status = j.at("status").get<std::string>();
    m.exit_code = j.at("exit_code").get<int>();
    m.notes = j.at("notes").get<std::vector<std::string>>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return m;
  }
};

/// Writes `bytes` atomically under out_dir and records its hash.
inline void emit_output(RunManifest& m, const std::filesystem::path& out_dir, const std::string& name,
                        std::string_view bytes) {
  write_file_atomic(out_dir / name, bytes);
  m.outputs.push_back({name, sha256_hex(bytes)});
}

}  // namespace gifs::io
