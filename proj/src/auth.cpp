#include "ose/auth.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

#include "ose/digest.hpp"
#include "ose/error.hpp"
#include "ose/pattern_io.hpp"

namespace fs = std::filesystem;

namespace ose {
namespace {

void validate_id(const std::string& id) {
  if (id.empty()) throw InvalidArgument("enroll: id must be non-empty");
  if (id.front() == '.' || id.find_first_of("/\\") != std::string::npos || id.find('\0') != std::string::npos)
    throw InvalidArgument("enroll: id must not start with '.' or contain path separators");
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string entry_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "entry_%03zu", i);
  return buf;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path, "cannot open for reading");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, e.what());
  }
}

Score score_of(const std::string& fingerprint, const CorrelationResult& r) { return {fingerprint, r}; }

}  // namespace

const Entry* ReferenceRecord::find(const std::string& fingerprint) const {
  for (const auto& e : entries)
    if (e.pattern.fingerprint() == fingerprint) return &e;
  return nullptr;
}

std::string content_hash(const std::vector<Entry>& entries) {
  Sha256 h;
  for (const auto& e : entries) {
    h.update("entry\n");
    const auto& p = e.pattern;
    h.update(std::to_string(p.width()) + "x" + std::to_string(p.height()) + "@" + std::to_string(p.bit_depth()) +
             ":" + p.fingerprint() + "\n");
    std::vector<unsigned char> bytes;
    bytes.reserve(2 * p.counts().size());
    for (auto v : p.counts()) {
      bytes.push_back(static_cast<unsigned char>(v & 0xff));
      bytes.push_back(static_cast<unsigned char>(v >> 8));
    }
    h.update(bytes);
  }
  return h.hex_digest();
}

ReferenceStore::ReferenceStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError(root_, "cannot create store: " + ec.message());
}

bool ReferenceStore::contains(const std::string& id) const {
  validate_id(id);
  return fs::exists(root_ / id / "manifest.json");
}

ReferenceRecord ReferenceStore::enroll(const std::string& id, std::vector<Entry> entries, std::string created_at) {
  validate_id(id);
  if (entries.empty()) throw InvalidArgument("enroll: at least one entry is required");
  std::set<std::string> seen;
  for (const auto& e : entries) {
    const auto fp = config_fingerprint(e.config);
    if (e.pattern.fingerprint() != fp)
      throw InvalidArgument("enroll: pattern fingerprint " + e.pattern.fingerprint() +
                            " does not match its configuration " + fp);
    if (!seen.insert(fp).second) throw InvalidArgument("enroll: duplicate configuration " + fp);
  }

  ReferenceRecord record{id, std::move(entries), created_at.empty() ? now_utc() : std::move(created_at), {}};
  record.content_hash = content_hash(record.entries);

  if (contains(id)) {
    ReferenceRecord existing = load(id);
    if (existing.content_hash != record.content_hash)
      throw Conflict("enroll: id '" + id + "' already enrolled with different content");
    return existing;
  }

  static std::atomic<unsigned> counter{0};
  const fs::path tmp = root_ / (".tmp-" + id + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    nlohmann::json manifest = {{"id", id}, {"created_at", record.created_at}};
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < record.entries.size(); ++i) {
      const auto stem = entry_stem(i);
      write_pattern(tmp / (stem + ".png"), record.entries[i].pattern, record.entries[i].config);
      list.push_back({{"pattern_file", stem + ".png"},
                      {"config_file", stem + ".json"},
                      {"fingerprint", record.entries[i].pattern.fingerprint()}});
    }
    manifest["entries"] = std::move(list);
    manifest["content_hash"] = record.content_hash;
    std::ofstream os(tmp / "manifest.json", std::ios::trunc);
    os << manifest.dump(2) << '\n';
    os.close();
    if (!os) throw IoError(tmp / "manifest.json", "write failed");
    fs::rename(tmp, root_ / id);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  return record;
}

ReferenceRecord ReferenceStore::load(const std::string& id) const {
  validate_id(id);
  const fs::path dir = root_ / id;
  if (!fs::exists(dir / "manifest.json")) throw NotFound("no reference enrolled under id '" + id + "'");
  const auto manifest = read_json(dir / "manifest.json");
  ReferenceRecord record;
  try {
    record.id = manifest.at("id").get<std::string>();
    record.created_at = manifest.at("created_at").get<std::string>();
    record.content_hash = manifest.at("content_hash").get<std::string>();
    for (const auto& e : manifest.at("entries")) {
      auto stored = read_pattern(dir / e.at("pattern_file").get<std::string>());
      if (stored.pattern.fingerprint() != e.at("fingerprint").get<std::string>())
        throw IoError(dir, "entry fingerprint does not match manifest");
      record.entries.push_back({std::move(stored.pattern), stored.config});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(dir / "manifest.json", e.what());
  }
  if (record.entries.empty()) throw IoError(dir, "record has no entries");
  if (content_hash(record.entries) != record.content_hash) throw IoError(dir, "content hash mismatch");
  return record;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::genuine: return "genuine";
    case Verdict::counterfeit: return "counterfeit";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(Protocol p) { return p == Protocol::single ? "single" : "challenge"; }

nlohmann::json AuthDecision::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : scores)
    list.push_back({{"fingerprint", s.fingerprint},
                    {"peak", s.result.peak},
                    {"dx", s.result.dx},
                    {"dy", s.result.dy},
                    {"rotation_deg", s.result.rotation * 180.0 / M_PI},
                    {"off_peak_mean", s.result.off_peak_mean},
                    {"off_peak_std", s.result.off_peak_std}});
  return {{"verdict", to_string(verdict)},
          {"protocol", to_string(protocol)},
          {"threshold", threshold},
          {"inconclusive_band", inconclusive_band},
          {"scores", std::move(list)}};
}

Verdict decide(std::span<const double> scores, double threshold, double band) {
  if (scores.empty()) throw InvalidArgument("decide: no scores");
  if (!(band >= 0.0)) throw InvalidArgument("decide: band must be >= 0");
  bool all_pass = true;
  for (double s : scores) {
    if (s < threshold - band) return Verdict::counterfeit;
    if (s < threshold + band) all_pass = false;
  }
  return all_pass ? Verdict::genuine : Verdict::inconclusive;
}

AuthDecision verify(const ReferenceRecord& record, const SpecklePattern& test, const OpticalConfig& config,
                    const DecisionPolicy& policy) {
  const auto fp = config_fingerprint(config);
  if (!test.fingerprint().empty() && test.fingerprint() != fp)
    throw InvalidArgument("verify: test pattern was not captured with the given configuration");
  const Entry* ref = record.find(fp);
  if (ref == nullptr) throw NotFound("verify: '" + record.id + "' has no entry for configuration " + fp);
  const auto r = match_with_rotation(ref->pattern, test, policy.search);
  AuthDecision d;
  d.scores.push_back(score_of(fp, r));
  d.threshold = policy.threshold;
  d.inconclusive_band = policy.inconclusive_band;
  d.protocol = Protocol::single;
  const double s[] = {r.peak};
  d.verdict = decide(s, policy.threshold, policy.inconclusive_band);
  return d;
}

AuthDecision verify(const ReferenceStore& store, const std::string& id, const SpecklePattern& test,
                    const OpticalConfig& config, const DecisionPolicy& policy) {
  return verify(store.load(id), test, config, policy);
}

AuthDecision challenge_verify(const ReferenceRecord& record, const std::vector<Entry>& probes,
                              const DecisionPolicy& policy, std::size_t min_probes) {
  if (probes.size() < min_probes)
    throw InvalidArgument("challenge: at least " + std::to_string(min_probes) + " probes are required");
  std::set<std::string> seen;
  std::vector<const Entry*> refs;
  for (const auto& p : probes) {
    const auto fp = config_fingerprint(p.config);
    if (!p.pattern.fingerprint().empty() && p.pattern.fingerprint() != fp)
      throw InvalidArgument("challenge: probe pattern was not captured with its configuration " + fp);
    if (!seen.insert(fp).second) throw InvalidArgument("challenge: probes must use distinct configurations");
    const Entry* ref = record.find(fp);
    if (ref == nullptr)
      throw InvalidArgument("challenge: no enrolled entry for probe configuration " + fp);
    refs.push_back(ref);
  }

  AuthDecision d;
  d.threshold = policy.threshold;
  d.inconclusive_band = policy.inconclusive_band;
  d.protocol = Protocol::challenge;
  std::vector<double> peaks;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto r = match_with_rotation(refs[i]->pattern, probes[i].pattern, policy.search);
    d.scores.push_back(score_of(config_fingerprint(probes[i].config), r));
    peaks.push_back(r.peak);
  }
  d.verdict = decide(peaks, policy.threshold, policy.inconclusive_band);
  return d;
}

AuthDecision challenge_verify(const ReferenceStore& store, const std::string& id, const std::vector<Entry>& probes,
                              const DecisionPolicy& policy, std::size_t min_probes) {
  return challenge_verify(store.load(id), probes, policy, min_probes);
}

Calibration calibrate_threshold(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) throw InvalidArgument("calibrate: both score lists must be non-empty");
  const double min_g = *std::min_element(genuine.begin(), genuine.end());
  const double max_i = *std::max_element(impostor.begin(), impostor.end());
  if (min_g <= max_i) throw NonSeparable(min_g, max_i);
  return {0.5 * (min_g + max_i), 0.5 * (min_g - max_i)};
}

}  // namespace ose
