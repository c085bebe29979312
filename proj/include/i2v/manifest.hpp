#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "i2v/errors.hpp"

namespace i2v {

inline constexpr std::string_view kToolVersion = "1.0.0";

// FNV-1a 64-bit content digest; cheap and stable across platforms.
inline std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

// Written alongside every produced artifact: the configuration snapshot,
// input digests, seed, and per-stage timings needed to reproduce a run.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::pair<std::string, double>> timings_ms;

  void add_input(const std::string& path) {
    inputs.emplace_back(path, fnv1a64_file(path));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "i2v";
    j["version"] = std::string(kToolVersion);
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    j["inputs"] = nlohmann::json::array();
    for (const auto& [path, digest] : inputs)
      j["inputs"].push_back({{"path", path}, {"fnv1a64", digest}});
    j["timings_ms"] = nlohmann::json::object();
    for (const auto& [stage, ms] : timings_ms) j["timings_ms"][stage] = ms;
    return j;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << to_json().dump(2) << '\n';
  }
};

}  // namespace i2v
