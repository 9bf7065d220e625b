#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ose/correlation.hpp"
#include "ose/optics.hpp"

namespace ose {

struct Entry {
  SpecklePattern pattern;
  OpticalConfig config;
};

struct ReferenceRecord {
  std::string id;
  std::vector<Entry> entries;
  std::string created_at;  ///< ISO-8601 UTC; not part of the content hash
  std::string content_hash;

  /// Entry captured under the setup with this fingerprint, or nullptr.
  const Entry* find(const std::string& fingerprint) const;
};

/// SHA-256 over every entry's setup fingerprint, geometry and pixel data, in
/// order. Uses the fingerprint rather than raw parameters so the hash survives
/// the sidecar's decimal round trip.
std::string content_hash(const std::vector<Entry>& entries);

/// Directory-backed store: `<root>/<id>/` holds entry_NNN.png, entry_NNN.json
/// and manifest.json. Single writer, any number of readers.
class ReferenceStore {
 public:
  explicit ReferenceStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Persists a record. Re-enrolling identical content returns the stored
  /// record; different content under an existing id throws Conflict.
  ReferenceRecord enroll(const std::string& id, std::vector<Entry> entries, std::string created_at = {});

  bool contains(const std::string& id) const;

  /// Loads and verifies a record; throws NotFound for unknown ids.
  ReferenceRecord load(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

enum class Verdict { genuine, counterfeit, inconclusive };
enum class Protocol { single, challenge };

std::string to_string(Verdict v);
std::string to_string(Protocol p);

struct Score {
  std::string fingerprint;
  CorrelationResult result;
};

struct AuthDecision {
  Verdict verdict = Verdict::inconclusive;
  std::vector<Score> scores;
  double threshold = 0.5;
  double inconclusive_band = 0.05;
  Protocol protocol = Protocol::single;

  nlohmann::json to_json() const;
};

struct DecisionPolicy {
  double threshold = 0.5;
  /// Scores within this distance of the threshold are inconclusive.
  double inconclusive_band = 0.05;
  RotationSearch search;
};

/// Counterfeit if any score is below threshold - band, genuine if every score
/// is at least threshold + band, inconclusive otherwise.
Verdict decide(std::span<const double> scores, double threshold, double band);

AuthDecision verify(const ReferenceRecord& record, const SpecklePattern& test, const OpticalConfig& config,
                    const DecisionPolicy& policy = {});
AuthDecision verify(const ReferenceStore& store, const std::string& id, const SpecklePattern& test,
                    const OpticalConfig& config, const DecisionPolicy& policy = {});

/// Multi-setup re-verification: every probe is matched against the entry
/// enrolled under the same setup, and all of them must pass.
AuthDecision challenge_verify(const ReferenceRecord& record, const std::vector<Entry>& probes,
                              const DecisionPolicy& policy = {}, std::size_t min_probes = 2);
AuthDecision challenge_verify(const ReferenceStore& store, const std::string& id,
                              const std::vector<Entry>& probes, const DecisionPolicy& policy = {},
                              std::size_t min_probes = 2);

struct Calibration {
  double threshold = 0.0;
  double margin = 0.0;
};

/// Midpoint between the worst genuine and the best impostor score; margin is
/// half the gap. Throws NonSeparable when the populations overlap.
Calibration calibrate_threshold(std::span<const double> genuine, std::span<const double> impostor);

}  // namespace ose
