#pragma once

// Golden-file comparison for run outputs. Volatile fields (ids, clocks,
// absolute paths) are blanked before comparing. Set TIERWATCH_UPDATE_GOLDEN=1
// to rewrite the files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

#include <json.hpp>

#include "tierwatch/config.hpp"
#include "tierwatch/pipeline.hpp"

namespace golden {

inline nlohmann::json stable(const tierwatch::RunRecord& r) {
  auto doc = tierwatch::to_json(r);
  doc.erase("run_id");
  doc.erase("created");
  doc.erase("article_ref");
  doc["settings"].erase("sources");
  for (auto& [k, st] : doc["status"].items()) st.erase("millis");
  if (doc["o5_assessment"].is_object()) doc["o5_assessment"].erase("run_id");
  if (doc["o6_plan"].is_object()) {
    for (auto& a : doc["o6_plan"]["audit"]) a["timestamp"] = "<timestamp>";
  }
  return doc;
}

inline std::string stable_text(std::string s) {
  static const std::regex stamp(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\d\.\d{3}Z)");
  return std::regex_replace(s, stamp, "<timestamp>");
}

inline bool updating() {
  const char* v = std::getenv("TIERWATCH_UPDATE_GOLDEN");
  return v && *v && std::string(v) != "0";
}

// Returns an empty string on match, else a description of the mismatch.
inline std::string compare(const std::filesystem::path& file, const std::string& actual) {
  if (updating()) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream(file, std::ios::binary) << actual;
    return {};
  }
  if (!std::filesystem::exists(file)) return "missing golden file " + file.string();
  auto expected = tierwatch::read_text_file(file);
  if (expected == actual) return {};
  return "golden mismatch for " + file.filename().string() + "\n--- expected\n" + expected + "\n--- actual\n" + actual;
}

inline std::string compare_json(const std::filesystem::path& file, const nlohmann::json& actual) {
  return compare(file, actual.dump(2) + "\n");
}

}  // namespace golden
