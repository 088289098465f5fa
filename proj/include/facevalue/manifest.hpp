#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace facevalue {

std::string tool_version();

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Record of how an artifact was produced. Holds no timestamps or absolute
/// output locations, so identical runs write identical manifests.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  nlohmann::json seeds;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;  // relative to the manifest's directory

  nlohmann::json to_json() const;
};

}  // namespace facevalue
