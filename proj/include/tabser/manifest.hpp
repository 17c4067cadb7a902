#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tabser {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility sidecar written beside every CLI output. The digest covers
/// the content hash of every input file, in registration order.
struct RunManifest {
  std::string command_line;
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::vector<std::uint64_t> seeds;
  std::string created_at;  // UTC ISO-8601

  struct Input {
    std::string path;
    std::string sha256;
  };
  std::vector<Input> inputs;

  void add_input(const std::string& path);
  void finalize();  // computes config_digest and created_at

  std::string to_json() const;
};

/// Writes through a temp file and renames, so readers never observe a
/// partially written output.
void atomic_write_file(const std::string& path, const std::string& content);

/// Writes `content` to `path` plus the manifest to `path`.manifest.json.
void write_output_with_manifest(const std::string& path, const std::string& content,
                                RunManifest manifest);

}  // namespace tabser
