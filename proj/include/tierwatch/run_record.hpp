#pragma once

// Persisted pipeline executions: stage outputs keyed o1..o7, per-stage
// status and timing, plus an append-only directory store.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tierwatch/decision_policy.hpp"
#include "tierwatch/enrichment.hpp"
#include "tierwatch/error.hpp"
#include "tierwatch/extraction.hpp"
#include "tierwatch/risk_engine.hpp"
#include "tierwatch/sourcing.hpp"
#include "tierwatch/supply_graph.hpp"

namespace tierwatch {

enum class Stage { kExtraction, kGraphQuery, kEnrichment, kRisk, kDecision, kSourcing };

inline constexpr std::array<Stage, 6> kStages{Stage::kExtraction, Stage::kGraphQuery, Stage::kEnrichment,
                                              Stage::kRisk,       Stage::kDecision,   Stage::kSourcing};

inline std::string_view stage_key(Stage s) {
  switch (s) {
    case Stage::kExtraction: return "o1_report";
    case Stage::kGraphQuery: return "o2_paths";
    case Stage::kEnrichment: return "o3_enriched";
    case Stage::kRisk: return "o5_assessment";
    case Stage::kDecision: return "o6_plan";
    case Stage::kSourcing: return "o7_sourcing";
  }
  return "";
}

enum class StageState { kSucceeded, kFailed, kSkipped };

inline std::string_view to_string(StageState s) {
  switch (s) {
    case StageState::kSucceeded: return "Succeeded";
    case StageState::kFailed: return "Failed";
    case StageState::kSkipped: return "Skipped";
  }
  return "Skipped";
}

struct StageStatus {
  StageState state = StageState::kSkipped;
  std::string reason;
  double millis = 0.0;

  bool operator==(const StageStatus&) const = default;
};

struct SourcingOutcome {
  std::string supplier;
  std::string product;
  std::vector<CandidateSupplier> candidates;
  std::string note;

  bool operator==(const SourcingOutcome&) const = default;
};

// Where the run's inputs came from, so a later review can resume sourcing.
struct RunSettings {
  int max_tier = 4;
  int sourcing_depth = 3;
  std::string backend;
  std::map<std::string, std::string> sources;  // e.g. "graph" -> file path

  bool operator==(const RunSettings&) const = default;
};

struct RunRecord {
  std::string run_id;
  std::string created;
  std::string focal;       // canonical id
  std::string focal_name;
  std::string article_ref;
  std::string article;
  RunSettings settings;

  std::optional<DisruptionReport> o1_report;
  std::optional<std::vector<DisruptedPath>> o2_paths;
  std::optional<std::vector<DisruptedPath>> o3_enriched;
  std::optional<RiskAssessment> o5_assessment;
  std::optional<ActionPlan> o6_plan;
  std::optional<std::vector<SourcingOutcome>> o7_sourcing;

  std::map<Stage, StageStatus> status;
  std::vector<std::string> warnings;

  const StageStatus& stage(Stage s) const {
    static const StageStatus kSkipped{};
    auto it = status.find(s);
    return it == status.end() ? kSkipped : it->second;
  }

  bool has_output(Stage s) const {
    switch (s) {
      case Stage::kExtraction: return o1_report.has_value();
      case Stage::kGraphQuery: return o2_paths.has_value();
      case Stage::kEnrichment: return o3_enriched.has_value();
      case Stage::kRisk: return o5_assessment.has_value();
      case Stage::kDecision: return o6_plan.has_value();
      case Stage::kSourcing: return o7_sourcing.has_value();
    }
    return false;
  }

  bool operator==(const RunRecord&) const = default;
};

// Stage k output present => every earlier stage Succeeded; o7 present => plan
// Approved or Overridden with at least one Replace item.
inline void validate_record(const RunRecord& r) {
  for (std::size_t k = 0; k < kStages.size(); ++k) {
    if (!r.has_output(kStages[k])) continue;
    if (r.stage(kStages[k]).state != StageState::kSucceeded) {
      throw Error(ErrorCode::kCorruptRecord, "run " + r.run_id + ": " + std::string(stage_key(kStages[k])) +
                                                 " present but its stage did not succeed");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (r.stage(kStages[j]).state != StageState::kSucceeded) {
        throw Error(ErrorCode::kCorruptRecord, "run " + r.run_id + ": " + std::string(stage_key(kStages[k])) +
                                                   " present after unsuccessful " + std::string(stage_key(kStages[j])));
      }
    }
  }
  if (r.o7_sourcing) {
    const bool released = r.o6_plan && (r.o6_plan->review_state == ReviewState::kApproved ||
                                        r.o6_plan->review_state == ReviewState::kOverridden);
    if (!released || !r.o6_plan->has_replace()) {
      throw Error(ErrorCode::kCorruptRecord,
                  "run " + r.run_id + ": sourcing output without an approved plan containing a Replace item");
    }
  }
}

// Sortable unique ids: UTC microsecond timestamp plus a random suffix. The
// timestamp part is strictly increasing within a process.
inline std::string new_run_id() {
  static std::atomic<std::int64_t> last{0};
  auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
                 .count();
  auto prev = last.load();
  std::int64_t next;
  do {
    next = std::max<std::int64_t>(now, prev + 1);
  } while (!last.compare_exchange_weak(prev, next));

  auto secs = static_cast<std::time_t>(next / 1'000'000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
  thread_local std::mt19937 rng{std::random_device{}()};
  char out[64];
  std::snprintf(out, sizeof out, "%s%06dZ-%04x", stamp, static_cast<int>(next % 1'000'000),
                static_cast<unsigned>(rng() & 0xffff));
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const SourcingOutcome& o) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : o.candidates) cands.push_back(to_json(c));
  return {{"supplier", o.supplier}, {"product", o.product}, {"candidates", std::move(cands)}, {"note", o.note}};
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json status = nlohmann::json::object();
  for (auto s : kStages) {
    const auto& st = r.stage(s);
    status[std::string(stage_key(s))] = {{"state", to_string(st.state)}, {"reason", st.reason}, {"millis", st.millis}};
  }
  nlohmann::json doc{{"run_id", r.run_id},
                     {"created", r.created},
                     {"focal", r.focal},
                     {"focal_name", r.focal_name},
                     {"article_ref", r.article_ref},
                     {"article", r.article},
                     {"settings",
                      {{"max_tier", r.settings.max_tier},
                       {"sourcing_depth", r.settings.sourcing_depth},
                       {"backend", r.settings.backend},
                       {"sources", r.settings.sources}}},
                     {"status", std::move(status)},
                     {"warnings", r.warnings}};
  doc["o1_report"] = r.o1_report ? to_json(*r.o1_report) : nlohmann::json(nullptr);
  doc["o2_paths"] = r.o2_paths ? to_json(*r.o2_paths) : nlohmann::json(nullptr);
  doc["o3_enriched"] = r.o3_enriched ? to_json(*r.o3_enriched) : nlohmann::json(nullptr);
  doc["o5_assessment"] = r.o5_assessment ? to_json(*r.o5_assessment) : nlohmann::json(nullptr);
  doc["o6_plan"] = r.o6_plan ? to_json(*r.o6_plan) : nlohmann::json(nullptr);
  if (r.o7_sourcing) {
    auto& list = doc["o7_sourcing"] = nlohmann::json::array();
    for (const auto& o : *r.o7_sourcing) list.push_back(to_json(o));
  } else {
    doc["o7_sourcing"] = nullptr;
  }
  return doc;
}

inline RunRecord record_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kCorruptRecord, "run record must be an object");
    RunRecord r;
    r.run_id = detail::require_string(doc, "run_id", "run record");
    r.created = detail::require_string(doc, "created", r.run_id);
    r.focal = detail::require_string(doc, "focal", r.run_id);
    r.focal_name = detail::require_string(doc, "focal_name", r.run_id);
    r.article_ref = detail::require_string(doc, "article_ref", r.run_id);
    r.article = detail::require_string(doc, "article", r.run_id);
    if (doc.contains("settings") && doc["settings"].is_object()) {
      const auto& s = doc["settings"];
      r.settings.max_tier = s.value("max_tier", 4);
      r.settings.sourcing_depth = s.value("sourcing_depth", 3);
      r.settings.backend = s.value("backend", std::string());
      if (s.contains("sources") && s["sources"].is_object()) {
        r.settings.sources = s["sources"].get<std::map<std::string, std::string>>();
      }
    }
    if (!doc.contains("status") || !doc["status"].is_object()) {
      throw Error(ErrorCode::kCorruptRecord, r.run_id + ": missing stage status");
    }
    for (auto s : kStages) {
      const auto key = std::string(stage_key(s));
      if (!doc["status"].contains(key)) throw Error(ErrorCode::kCorruptRecord, r.run_id + ": missing status for " + key);
      const auto& st = doc["status"][key];
      StageStatus status;
      auto state = detail::require_string(st, "state", key);
      if (state == "Succeeded") status.state = StageState::kSucceeded;
      else if (state == "Failed") status.state = StageState::kFailed;
      else if (state == "Skipped") status.state = StageState::kSkipped;
      else throw Error(ErrorCode::kCorruptRecord, r.run_id + ": unknown stage state '" + state + "'");
      status.reason = st.value("reason", std::string());
      status.millis = st.value("millis", 0.0);
      r.status[s] = status;
    }
    if (doc.contains("warnings") && doc["warnings"].is_array()) {
      r.warnings = doc["warnings"].get<std::vector<std::string>>();
    }
    auto present = [&](const char* key) { return doc.contains(key) && !doc[key].is_null(); };
    if (present("o1_report")) r.o1_report = validate_report(doc["o1_report"]);
    if (present("o2_paths")) r.o2_paths = paths_from_json(doc["o2_paths"]);
    if (present("o3_enriched")) r.o3_enriched = paths_from_json(doc["o3_enriched"]);
    if (present("o5_assessment")) r.o5_assessment = assessment_from_json(doc["o5_assessment"]);
    if (present("o6_plan")) r.o6_plan = plan_from_json(doc["o6_plan"]);
    if (present("o7_sourcing")) {
      if (!doc["o7_sourcing"].is_array()) throw Error(ErrorCode::kCorruptRecord, r.run_id + ": o7_sourcing must be an array");
      std::vector<SourcingOutcome> list;
      for (const auto& o : doc["o7_sourcing"]) {
        SourcingOutcome out;
        out.supplier = detail::require_string(o, "supplier", "o7_sourcing");
        out.product = detail::require_string(o, "product", "o7_sourcing");
        out.note = o.value("note", std::string());
        if (o.contains("candidates") && o["candidates"].is_array()) {
          for (const auto& c : o["candidates"]) out.candidates.push_back(candidate_from_json(c));
        }
        list.push_back(std::move(out));
      }
      r.o7_sourcing = std::move(list);
    }
    validate_record(r);
    return r;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptRecord) throw;
    throw Error(ErrorCode::kCorruptRecord, std::string("corrupt run record: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptRecord, std::string("corrupt run record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Directory store: one `<run_id>.json` per run, written atomically.

class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create run store '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  void persist(const RunRecord& record) const {
    validate_record(record);
    if (!valid_id(record.run_id)) throw Error(ErrorCode::kInvalidInput, "invalid run id '" + record.run_id + "'");
    auto target = path_for(record.run_id);
    auto tmp = target;
    tmp += ".tmp" + std::to_string(std::hash<std::string>{}(new_run_id()));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
      out << to_json(record).dump(2) << '\n';
      if (!out.flush()) throw Error(ErrorCode::kIo, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "cannot commit run '" + record.run_id + "'");
    }
  }

  RunRecord load(std::string_view run_id) const {
    if (!valid_id(run_id)) throw Error(ErrorCode::kNotFound, "unknown run '" + std::string(run_id) + "'");
    auto path = path_for(run_id);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kNotFound, "unknown run '" + std::string(run_id) + "'");
    auto doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw Error(ErrorCode::kCorruptRecord, "run '" + std::string(run_id) + "' does not parse");
    auto record = record_from_json(doc);
    if (record.run_id != run_id) {
      throw Error(ErrorCode::kCorruptRecord, "run file '" + path.string() + "' holds id '" + record.run_id + "'");
    }
    return record;
  }

  bool exists(std::string_view run_id) const {
    return valid_id(run_id) && std::filesystem::exists(path_for(run_id));
  }

  // Newest first.
  std::vector<std::string> list() const {
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.rbegin(), ids.rend());
    return ids;
  }

 private:
  static bool valid_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
      return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-' || c == '_';
    });
  }

  std::filesystem::path path_for(std::string_view id) const { return dir_ / (std::string(id) + ".json"); }

  std::filesystem::path dir_;
};

}  // namespace tierwatch
