#include "manifest.hpp"

#include <algorithm>
#include <fstream>

#include "ose/digest.hpp"
#include "ose/error.hpp"

namespace fs = std::filesystem;

namespace ose::cli {
namespace {

nlohmann::json digest_entry(const fs::path& p) {
  if (fs::is_directory(p)) {
    // Directories are digested file by file in lexical order.
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    nlohmann::json items = nlohmann::json::array();
    for (const auto& f : files)
      items.push_back({{"path", fs::relative(f, p).generic_string()}, {"sha256", sha256_file(f)}});
    return {{"path", p.generic_string()}, {"files", items}};
  }
  return {{"path", p.generic_string()}, {"sha256", sha256_file(p)}};
}

}  // namespace

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const fs::path& path) { inputs_.push_back(digest_entry(path)); }

void RunManifest::add_output(const fs::path& path) { outputs_.push_back(path); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& p : outputs_) outputs.push_back(digest_entry(p));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return {{"command", command_}, {"params", params_},   {"seeds", seeds_},
          {"inputs", inputs_},   {"outputs", outputs}, {"version", OSE_VERSION},
          {"duration_s", seconds}};
}

void RunManifest::write(const fs::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path, "cannot open manifest for writing");
  os << to_json().dump(2) << '\n';
  if (!os) throw IoError(path, "manifest write failed");
}

fs::path manifest_path_for(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace ose::cli
