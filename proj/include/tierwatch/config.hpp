#pragma once

// Assembles a PipelineConfig from data files on disk.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "tierwatch/enrichment.hpp"
#include "tierwatch/error.hpp"
#include "tierwatch/extraction.hpp"
#include "tierwatch/http_backends.hpp"
#include "tierwatch/pipeline.hpp"
#include "tierwatch/sourcing.hpp"
#include "tierwatch/supply_graph.hpp"

namespace tierwatch {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kMalformedDocument, "'" + path.string() + "' is not valid JSON");
  return doc;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct DataFiles {
  std::string graph;
  std::string gazetteer;
  std::string lexicon;
  std::string catalog;        // optional
  std::string alternatives;   // optional
  std::string search_replay;  // optional recorded search answers

  // Conventional names inside a data directory; missing optional files are
  // left empty.
  static DataFiles in_directory(const std::filesystem::path& dir) {
    auto pick = [&](const char* name) {
      auto p = dir / name;
      return std::filesystem::exists(p) ? p.string() : std::string();
    };
    DataFiles f;
    f.graph = pick("graph.json");
    f.gazetteer = pick("gazetteer.json");
    f.lexicon = pick("lexicon.json");
    f.catalog = pick("products.json");
    f.alternatives = pick("alternatives.json");
    f.search_replay = pick("search_replay.json");
    return f;
  }
};

enum class BackendKind { kRule, kModel };

inline PipelineConfig load_pipeline_config(const DataFiles& files, const SupplyGraph& graph, BackendKind backend,
                                           ReviewMode mode = ReviewMode::kGated) {
  PipelineConfig c;
  c.review_mode = mode;
  if (backend == BackendKind::kRule) {
    if (files.gazetteer.empty() || files.lexicon.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "rule backend needs a gazetteer and a type lexicon");
    }
    c.extraction = rule_backend(gazetteer_from_json(read_json_file(files.gazetteer)),
                                lexicon_from_json(read_json_file(files.lexicon)));
  } else {
    c.extraction = model_backend(ModelConfig::from_env());
  }
  if (!files.catalog.empty()) c.catalog = catalog_from_json(read_json_file(files.catalog), &graph);
  if (!files.alternatives.empty()) {
    c.alternatives = catalog_candidate_source(alternatives_from_json(read_json_file(files.alternatives)));
  }
  if (!files.search_replay.empty()) {
    c.search = replay_search_backend(read_json_file(files.search_replay));
  } else if (env("TIERWATCH_SEARCH_API_KEY")) {
    c.search = http_search_backend(SearchConfig::from_env());
  }
  c.settings.backend = backend == BackendKind::kRule ? "rule" : "model";
  auto put = [&](const char* key, const std::string& path) {
    if (!path.empty()) c.settings.sources[key] = std::filesystem::absolute(path).string();
  };
  put("graph", files.graph);
  put("gazetteer", files.gazetteer);
  put("lexicon", files.lexicon);
  put("catalog", files.catalog);
  put("alternatives", files.alternatives);
  put("search_replay", files.search_replay);
  return c;
}

// Recovers the data files a run was started with.
inline DataFiles files_from_settings(const RunSettings& s) {
  auto get = [&](const char* key) {
    auto it = s.sources.find(key);
    return it == s.sources.end() ? std::string() : it->second;
  };
  return {get("graph"), get("gazetteer"), get("lexicon"), get("catalog"), get("alternatives"), get("search_replay")};
}

}  // namespace tierwatch
