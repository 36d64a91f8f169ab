#pragma once

// Tier-1 supplier risk: component metrics, weighted composite score, level
// assignment and the top-10 filter.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tierwatch/error.hpp"
#include "tierwatch/supply_graph.hpp"

namespace tierwatch {

struct RiskComponents {
  double exposure_depth = 0.0;
  double exposure_breadth = 0.0;
  double dependency_ratio = 0.0;
  double downstream_criticality = 0.0;
  double supplier_centrality = 0.0;

  bool operator==(const RiskComponents&) const = default;
};

struct RiskWeights {
  double breadth = 0.35;
  double dependency = 0.25;
  double criticality = 0.20;
  double centrality = 0.10;
  double depth = 0.10;

  double sum() const { return breadth + dependency + criticality + centrality + depth; }

  void validate() const {
    for (double w : {breadth, dependency, criticality, centrality, depth}) {
      if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "risk weights must be non-negative");
    }
    if (std::abs(sum() - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidConfig, "risk weights must sum to 1");
  }
};

enum class RiskLevel { kHigh, kMedium, kLow };

inline std::string_view to_string(RiskLevel l) {
  switch (l) {
    case RiskLevel::kHigh: return "HIGH";
    case RiskLevel::kMedium: return "MEDIUM";
    case RiskLevel::kLow: return "LOW";
  }
  return "LOW";
}

inline std::optional<RiskLevel> parse_risk_level(std::string_view s) {
  if (s == "HIGH") return RiskLevel::kHigh;
  if (s == "MEDIUM") return RiskLevel::kMedium;
  if (s == "LOW") return RiskLevel::kLow;
  return std::nullopt;
}

struct RiskThresholds {
  double high = 0.6;     // score >= high
  double medium = 0.45;  // medium <= score < high

  void validate() const {
    if (!(0.0 <= medium && medium <= high && high <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "risk thresholds must satisfy 0 <= medium <= high <= 1");
    }
  }
};

struct SupplierRisk {
  std::string supplier;
  std::string name;
  RiskComponents components;
  double score = 0.0;
  RiskLevel level = RiskLevel::kLow;

  bool operator==(const SupplierRisk&) const = default;
};

struct RiskAssessment {
  std::string run_id;
  std::vector<SupplierRisk> suppliers;  // descending score, id tie-break, at most 10

  bool operator==(const RiskAssessment&) const = default;
};

inline constexpr std::size_t kTopSuppliers = 10;

namespace detail {

inline void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace detail

inline double composite_score(const RiskComponents& c, const RiskWeights& w = {}) {
  detail::check_unit(c.exposure_breadth, "exposure_breadth");
  detail::check_unit(c.dependency_ratio, "dependency_ratio");
  detail::check_unit(c.downstream_criticality, "downstream_criticality");
  detail::check_unit(c.supplier_centrality, "supplier_centrality");
  detail::check_unit(c.exposure_depth, "exposure_depth");
  double s = w.breadth * c.exposure_breadth + w.dependency * c.dependency_ratio +
             w.criticality * c.downstream_criticality + w.centrality * c.supplier_centrality +
             w.depth * c.exposure_depth;
  return std::clamp(s, 0.0, 1.0);
}

inline RiskLevel assign_level(double score, const RiskThresholds& t = {}) {
  detail::check_unit(score, "risk score");
  if (score >= t.high) return RiskLevel::kHigh;
  if (score >= t.medium) return RiskLevel::kMedium;
  return RiskLevel::kLow;
}

// Terminal nodes of the disrupted paths.
inline std::set<std::string> disrupted_nodes(const std::vector<DisruptedPath>& paths) {
  std::set<std::string> out;
  for (const auto& p : paths) {
    if (!p.nodes.empty() && p.disrupted_tier > 0) out.insert(p.nodes.back().id);
  }
  return out;
}

// Components from an explicit disrupted set; `compute_components` derives the
// set from the paths.
inline RiskComponents components_for(const SupplyGraph& graph, const TierMap& tiers, const CentralityTable& cent,
                                     const std::set<std::string>& disrupted, std::string_view supplier,
                                     int max_tier = 4) {
  if (max_tier < 1) throw Error(ErrorCode::kInvalidInput, "max_tier must be >= 1");
  if (tiers.tier_of(supplier) != 1) {
    throw Error(ErrorCode::kInvalidInput, "'" + std::string(supplier) + "' is not a Tier-1 supplier");
  }
  const bool self_disrupted = disrupted.count(std::string(supplier)) > 0;
  const auto downstream = downstream_set(graph, supplier);

  RiskComponents c;
  c.supplier_centrality = cent.at(supplier).degree;

  double weight_all = 0.0, weight_hit = 0.0;
  std::size_t hits = 0;
  int deepest = self_disrupted ? 1 : 0;
  for (const auto& [id, depth] : downstream) {
    const double w = 1.0 / depth;
    weight_all += w;
    if (!disrupted.count(id)) continue;
    weight_hit += w;
    ++hits;
    if (auto t = tiers.tier_of(id)) deepest = std::max(deepest, *t);
    const auto& e = cent.at(id);
    c.downstream_criticality = std::max(c.downstream_criticality, std::max(e.degree, e.pagerank));
  }

  if (self_disrupted) {
    c.exposure_breadth = 1.0;
    c.dependency_ratio = 1.0;
  } else if (!downstream.empty()) {
    c.exposure_breadth = weight_hit / weight_all;
    c.dependency_ratio = static_cast<double>(hits) / static_cast<double>(downstream.size());
  }
  c.exposure_depth = std::min(1.0, static_cast<double>(deepest) / max_tier);
  return c;
}

inline RiskComponents compute_components(const SupplyGraph& graph, const TierMap& tiers, const CentralityTable& cent,
                                         const std::vector<DisruptedPath>& paths, std::string_view supplier,
                                         int max_tier = 4) {
  return components_for(graph, tiers, cent, disrupted_nodes(paths), supplier, max_tier);
}

struct AssessOptions {
  int max_tier = 4;
  RiskWeights weights{};
  RiskThresholds thresholds{};
  std::size_t top_n = kTopSuppliers;
};

// Tier-1 suppliers that are disrupted themselves or have a disrupted node
// anywhere upstream.
inline std::vector<std::string> exposed_tier1(const SupplyGraph& graph, const TierMap& tiers,
                                              const std::set<std::string>& disrupted) {
  std::vector<std::string> out;
  for (const auto& [id, tier] : tiers.tiers) {
    if (tier != 1) continue;
    bool exposed = disrupted.count(id) > 0;
    if (!exposed) {
      for (const auto& [d, depth] : downstream_set(graph, id)) {
        if (disrupted.count(d)) {
          exposed = true;
          break;
        }
      }
    }
    if (exposed) out.push_back(id);
  }
  return out;
}

inline void rank_suppliers(std::vector<SupplierRisk>& risks, std::size_t top_n) {
  std::sort(risks.begin(), risks.end(), [](const SupplierRisk& a, const SupplierRisk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.supplier < b.supplier;
  });
  if (risks.size() > top_n) risks.resize(top_n);
}

inline RiskAssessment assess(const SupplyGraph& graph, std::string_view focal, const std::vector<DisruptedPath>& paths,
                             const AssessOptions& opts = {}) {
  if (!graph.contains(focal)) throw Error(ErrorCode::kUnknownEntity, "unknown focal company '" + std::string(focal) + "'");
  opts.weights.validate();
  opts.thresholds.validate();
  RiskAssessment out;
  const auto disrupted = disrupted_nodes(paths);
  if (disrupted.empty()) return out;

  const auto tiers = annotate_tiers(graph, focal);
  const auto cent = centrality(graph);
  for (const auto& id : exposed_tier1(graph, tiers, disrupted)) {
    SupplierRisk r;
    r.supplier = id;
    r.name = graph.company(id).name;
    r.components = components_for(graph, tiers, cent, disrupted, id, opts.max_tier);
    r.score = composite_score(r.components, opts.weights);
    r.level = assign_level(r.score, opts.thresholds);
    out.suppliers.push_back(std::move(r));
  }
  rank_suppliers(out.suppliers, opts.top_n);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. Scores are written with 6 decimals.

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline nlohmann::json to_json(const RiskComponents& c) {
  return {{"exposure_depth", round6(c.exposure_depth)},
          {"exposure_breadth", round6(c.exposure_breadth)},
          {"dependency_ratio", round6(c.dependency_ratio)},
          {"downstream_criticality", round6(c.downstream_criticality)},
          {"supplier_centrality", round6(c.supplier_centrality)}};
}

inline nlohmann::json to_json(const RiskAssessment& a) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : a.suppliers) {
    list.push_back({{"supplier", s.supplier},
                    {"name", s.name},
                    {"score", round6(s.score)},
                    {"level", to_string(s.level)},
                    {"components", to_json(s.components)}});
  }
  return {{"run_id", a.run_id}, {"suppliers", std::move(list)}};
}

namespace detail {

inline double require_unit_number(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number()) {
    throw Error(ErrorCode::kMalformedDocument, where + ": missing numeric field '" + key + "'");
  }
  return obj[key].get<double>();
}

}  // namespace detail

inline RiskAssessment assessment_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("suppliers") || !doc["suppliers"].is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "assessment requires a 'suppliers' array");
  }
  RiskAssessment a;
  if (doc.contains("run_id") && doc["run_id"].is_string()) a.run_id = doc["run_id"].get<std::string>();
  for (const auto& s : doc["suppliers"]) {
    SupplierRisk r;
    r.supplier = detail::require_string(s, "supplier", "assessment entry");
    r.name = s.contains("name") && s["name"].is_string() ? s["name"].get<std::string>() : r.supplier;
    r.score = detail::require_unit_number(s, "score", r.supplier);
    auto level = parse_risk_level(detail::require_string(s, "level", r.supplier));
    if (!level) throw Error(ErrorCode::kMalformedDocument, r.supplier + ": unknown risk level");
    r.level = *level;
    if (!s.contains("components")) throw Error(ErrorCode::kMalformedDocument, r.supplier + ": missing components");
    const auto& c = s["components"];
    r.components.exposure_depth = detail::require_unit_number(c, "exposure_depth", r.supplier);
    r.components.exposure_breadth = detail::require_unit_number(c, "exposure_breadth", r.supplier);
    r.components.dependency_ratio = detail::require_unit_number(c, "dependency_ratio", r.supplier);
    r.components.downstream_criticality = detail::require_unit_number(c, "downstream_criticality", r.supplier);
    r.components.supplier_centrality = detail::require_unit_number(c, "supplier_centrality", r.supplier);
    a.suppliers.push_back(std::move(r));
  }
  return a;
}

}  // namespace tierwatch
