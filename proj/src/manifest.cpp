#include "tabser/manifest.hpp"

#include <nlohmann/json.hpp>

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "tabser/dataset.hpp"
#include "tabser/errors.hpp"
#include "tabser/hash.hpp"

namespace tabser {

void RunManifest::add_input(const std::string& path) {
  inputs.push_back({path, sha256_hex(read_file(path))});
}

void RunManifest::finalize() {
  std::string material;
  for (const auto& input : inputs) {
    material += input.path;
    material += '\n';
    material += input.sha256;
    material += '\n';
  }
  config_digest = "sha256:" + sha256_hex(material);

  const auto now = std::chrono::system_clock::now();
  const std::time_t now_time = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&now_time, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  created_at = buf;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["command_line"] = command_line;
  doc["config_digest"] = config_digest;
  doc["tool_version"] = tool_version;
  doc["seeds"] = seeds;
  doc["created_at"] = created_at;
  auto& inputs_json = doc["inputs"] = nlohmann::ordered_json::array();
  for (const auto& input : inputs) {
    inputs_json.push_back({{"path", input.path}, {"sha256", input.sha256}});
  }
  return doc.dump(2) + "\n";
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path temp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError(ErrorKind::io_error, "cannot write '" + temp.string() + "'");
    }
    out << content;
    if (!out) {
      throw DataError(ErrorKind::io_error, "short write to '" + temp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw DataError(ErrorKind::io_error, "cannot rename output into place: '" + path + "'");
  }
}

void write_output_with_manifest(const std::string& path, const std::string& content,
                                RunManifest manifest) {
  manifest.finalize();
  atomic_write_file(path, content);
  atomic_write_file(path + ".manifest.json", manifest.to_json());
}

}  // namespace tabser
