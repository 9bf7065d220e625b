#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ose::cli {

/// Record of one CLI invocation: command, resolved parameters, seeds, input
/// and output digests, tool version and wall-clock duration.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_params(nlohmann::json params) { params_ = std::move(params); }
  void add_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  /// Hashes the file immediately.
  void add_input(const std::filesystem::path& path);
  /// Hashed when the manifest is rendered.
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

/// `<output>.manifest.json`
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace ose::cli
