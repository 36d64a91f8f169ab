#pragma once

// Alternative suppliers for Replace items, validated against the active
// disruption by an upstream scan.

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tierwatch/error.hpp"
#include "tierwatch/supply_graph.hpp"
#include "tierwatch/text.hpp"

namespace tierwatch {

enum class CandidateOrigin { kCatalog, kSearch };
enum class Validation { kUnchecked, kDisruptionFree, kExposed };

inline std::string_view to_string(CandidateOrigin o) { return o == CandidateOrigin::kCatalog ? "catalog" : "search"; }

inline std::string_view to_string(Validation v) {
  switch (v) {
    case Validation::kUnchecked: return "Unchecked";
    case Validation::kDisruptionFree: return "DisruptionFree";
    case Validation::kExposed: return "Exposed";
  }
  return "Unchecked";
}

struct CandidateSupplier {
  std::string name;
  std::string country;
  std::string industry;
  CandidateOrigin source = CandidateOrigin::kCatalog;
  Validation validation = Validation::kUnchecked;
  std::vector<DisruptedPath> exposure_evidence;  // empty iff not Exposed
  std::optional<std::string> company_id;         // set once resolved in the graph
  std::string note;

  bool operator==(const CandidateSupplier&) const = default;
};

struct AlternativeRow {
  std::string product;
  std::string name;
  std::string country;
  std::string industry;
};

inline std::vector<AlternativeRow> alternatives_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedDocument, "alternative-supplier catalog must be an array");
  std::vector<AlternativeRow> rows;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string where = "alternatives[" + std::to_string(i) + "]";
    rows.push_back({detail::require_string(doc[i], "product", where), detail::require_string(doc[i], "name", where),
                    detail::require_string(doc[i], "country", where),
                    detail::require_string(doc[i], "industry", where)});
  }
  return rows;
}

struct CandidateSource {
  std::string name;
  std::function<std::vector<CandidateSupplier>(std::string_view product)> lookup;
};

// Product strings are compared part-wise: "Catalysts, Precious Metal Products"
// matches catalog rows for "Catalysts" or "Precious Metal Products".
inline std::set<std::string> product_parts(std::string_view product) {
  std::set<std::string> parts;
  std::string cur;
  auto flush = [&] {
    auto key = text::normalize_key(cur);
    if (!key.empty()) parts.insert(key);
    cur.clear();
  };
  for (char c : product) {
    if (c == ',' || c == ';' || c == '/') flush();
    else cur.push_back(c);
  }
  flush();
  return parts;
}

inline CandidateSource catalog_candidate_source(std::vector<AlternativeRow> rows) {
  CandidateSource src;
  src.name = "catalog";
  src.lookup = [rows = std::move(rows)](std::string_view product) {
    std::vector<CandidateSupplier> out;
    const auto wanted = product_parts(product);
    for (const auto& r : rows) {
      bool hit = false;
      for (const auto& p : product_parts(r.product)) hit = hit || wanted.count(p) > 0;
      if (!hit) continue;
      CandidateSupplier c;
      c.name = r.name;
      c.country = r.country;
      c.industry = r.industry;
      c.source = CandidateOrigin::kCatalog;
      out.push_back(std::move(c));
    }
    return out;
  };
  return src;
}

// Candidates for `product`, minus the supplier being replaced and duplicate
// names. Source order is kept.
inline std::vector<CandidateSupplier> find_alternatives(std::string_view product, const CompanyRecord& excluded,
                                                        const CandidateSource* source) {
  if (!source || !source->lookup) throw Error(ErrorCode::kNoCandidateSource, "no candidate source configured");
  const auto excluded_name = text::normalize_company(excluded.name);
  const auto excluded_id = text::normalize_company(excluded.id);
  std::vector<CandidateSupplier> out;
  std::set<std::string> seen;
  for (auto& c : source->lookup(product)) {
    auto key = text::normalize_company(c.name);
    if (key.empty() || key == excluded_name || key == excluded_id) continue;
    if (c.company_id && *c.company_id == excluded.id) continue;
    if (!seen.insert(key).second) continue;
    c.validation = Validation::kUnchecked;
    c.exposure_evidence.clear();
    out.push_back(std::move(c));
  }
  return out;
}

// Scans the candidate and its upstream suppliers up to `depth` tiers. A
// matching candidate yields a single-node evidence path.
inline CandidateSupplier validate_candidate(const SupplyGraph& graph, CandidateSupplier candidate,
                                            const DisruptionCriteria& criteria, int depth = 3) {
  if (depth <= 0) throw Error(ErrorCode::kInvalidInput, "validation depth must be positive");
  candidate.exposure_evidence.clear();
  std::optional<std::string> id = candidate.company_id;
  if (!id && !text::trim(candidate.name).empty()) id = resolve_entity(candidate.name, graph).id;
  if (!id || !graph.contains(*id)) {
    candidate.validation = Validation::kUnchecked;
    candidate.company_id.reset();
    candidate.note = "not in graph: upstream chain cannot be validated";
    return candidate;
  }
  candidate.company_id = id;
  CriteriaMatcher matcher(graph, criteria);
  candidate.exposure_evidence =
      detail::minimal_paths(graph, graph.index_of(*id), matcher, depth, /*include_root=*/true);
  if (candidate.exposure_evidence.empty()) {
    candidate.validation = Validation::kDisruptionFree;
    candidate.note = "no disrupted supplier up to Tier-" + std::to_string(depth);
  } else {
    candidate.validation = Validation::kExposed;
    candidate.note = std::to_string(candidate.exposure_evidence.size()) + " disrupted upstream path(s)";
  }
  return candidate;
}

inline nlohmann::json to_json(const CandidateSupplier& c) {
  nlohmann::json j{{"name", c.name},
                   {"country", c.country},
                   {"industry", c.industry},
                   {"source", to_string(c.source)},
                   {"validation", to_string(c.validation)},
                   {"exposure_evidence", to_json(c.exposure_evidence)},
                   {"note", c.note}};
  j["company_id"] = c.company_id ? nlohmann::json(*c.company_id) : nlohmann::json(nullptr);
  return j;
}

inline CandidateSupplier candidate_from_json(const nlohmann::json& j) {
  CandidateSupplier c;
  c.name = detail::require_string(j, "name", "candidate");
  c.country = detail::require_string(j, "country", "candidate");
  c.industry = detail::require_string(j, "industry", "candidate");
  auto src = detail::require_string(j, "source", "candidate");
  c.source = src == "search" ? CandidateOrigin::kSearch : CandidateOrigin::kCatalog;
  auto v = detail::require_string(j, "validation", "candidate");
  if (v == "Unchecked") c.validation = Validation::kUnchecked;
  else if (v == "DisruptionFree") c.validation = Validation::kDisruptionFree;
  else if (v == "Exposed") c.validation = Validation::kExposed;
  else throw Error(ErrorCode::kMalformedDocument, "candidate: unknown validation '" + v + "'");
  if (j.contains("exposure_evidence")) c.exposure_evidence = paths_from_json(j["exposure_evidence"]);
  if (j.contains("company_id") && j["company_id"].is_string()) c.company_id = j["company_id"].get<std::string>();
  if (j.contains("note") && j["note"].is_string()) c.note = j["note"];
  if (c.validation == Validation::kExposed && c.exposure_evidence.empty()) {
    throw Error(ErrorCode::kMalformedDocument, "candidate '" + c.name + "' is Exposed without evidence");
  }
  return c;
}

}  // namespace tierwatch
