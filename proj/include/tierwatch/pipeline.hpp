#pragma once

// Staged execution: extraction -> graph query -> enrichment -> risk ->
// decision -> (review gate) -> sourcing. Visualization export reads a
// finished record; it is not a stage.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tierwatch/decision_policy.hpp"
#include "tierwatch/enrichment.hpp"
#include "tierwatch/error.hpp"
#include "tierwatch/extraction.hpp"
#include "tierwatch/risk_engine.hpp"
#include "tierwatch/run_record.hpp"
#include "tierwatch/sourcing.hpp"
#include "tierwatch/supply_graph.hpp"

namespace tierwatch {

enum class ReviewMode { kGated, kAutoApprove };

struct PipelineConfig {
  int max_tier = 4;
  RiskWeights weights{};
  RiskThresholds thresholds{};
  int sourcing_depth = 3;
  ReviewMode review_mode = ReviewMode::kGated;
  std::string auto_reviewer = "auto-approve";

  ExtractionBackend extraction;
  ProductCatalog catalog;
  std::optional<SearchBackend> search;
  std::optional<CandidateSource> alternatives;
  NarrativeBackend narrative;

  RunSettings settings;  // provenance copied into each record

  void validate() const {
    if (max_tier < 1) throw Error(ErrorCode::kInvalidConfig, "max_tier must be >= 1");
    if (sourcing_depth < 1) throw Error(ErrorCode::kInvalidConfig, "sourcing depth must be >= 1");
    weights.validate();
    thresholds.validate();
    if (!extraction.invoke) throw Error(ErrorCode::kInvalidConfig, "no extraction backend configured");
  }
};

// Alternatives are chosen for the same product, hence usually the same
// industry; their validation therefore checks geography and named companies.
inline DisruptionCriteria sourcing_criteria(const DisruptionReport& report) {
  DisruptionCriteria c = report.criteria();
  c.industries.clear();
  return c;
}

namespace detail {

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double millis() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void skip_from(RunRecord& r, std::size_t first, const std::string& reason) {
  for (std::size_t k = first; k < kStages.size(); ++k) r.status[kStages[k]] = {StageState::kSkipped, reason, 0.0};
}

// Product flowing from `supplier` into the focal firm, from the enriched paths
// or the catalog.
inline std::string product_into_focal(const RunRecord& r, const ProductCatalog& catalog, const std::string& supplier) {
  if (r.o3_enriched) {
    for (const auto& p : *r.o3_enriched) {
      if (p.nodes.size() > 1 && p.nodes[1].id == supplier && !p.products.empty() && p.products[0] != kUnknownProduct) {
        return p.products[0];
      }
    }
  }
  if (auto it = catalog.entries.find({supplier, r.focal}); it != catalog.entries.end()) return it->second;
  if (auto it = catalog.fallback.find(supplier); it != catalog.fallback.end()) return it->second;
  return std::string(kUnknownProduct);
}

}  // namespace detail

// Stage 7. Runs only for released plans with Replace items.
inline void run_sourcing(RunRecord& r, const SupplyGraph& graph, const PipelineConfig& config) {
  if (!r.o6_plan || !(r.o6_plan->review_state == ReviewState::kApproved ||
                      r.o6_plan->review_state == ReviewState::kOverridden)) {
    r.status[Stage::kSourcing] = {StageState::kSkipped, "awaiting review", 0.0};
    return;
  }
  if (!r.o6_plan->has_replace()) {
    r.status[Stage::kSourcing] = {StageState::kSkipped, "no Replace items", 0.0};
    return;
  }
  detail::StageTimer timer;
  try {
    const auto criteria = sourcing_criteria(r.o1_report.value_or(DisruptionReport{}));
    const CandidateSource* source = config.alternatives ? &*config.alternatives : nullptr;
    std::vector<SourcingOutcome> outcomes;
    for (const auto& item : r.o6_plan->items) {
      if (item.action != Action::kReplace) continue;
      SourcingOutcome o;
      o.supplier = item.supplier;
      o.product = detail::product_into_focal(r, config.catalog, item.supplier);
      CompanyRecord excluded{item.supplier, item.supplier_name, "-", "-"};
      if (auto idx = graph.find(item.supplier)) excluded = graph.company(*idx);
      for (auto& c : find_alternatives(o.product, excluded, source)) {
        o.candidates.push_back(validate_candidate(graph, std::move(c), criteria, config.sourcing_depth));
      }
      o.note = o.candidates.empty() ? "no alternatives found"
                                    : std::to_string(o.candidates.size()) + " candidate(s) checked";
      outcomes.push_back(std::move(o));
    }
    r.o7_sourcing = std::move(outcomes);
    r.status[Stage::kSourcing] = {StageState::kSucceeded, "", timer.millis()};
  } catch (const std::exception& e) {
    r.o7_sourcing.reset();
    r.status[Stage::kSourcing] = {StageState::kFailed, e.what(), timer.millis()};
  }
}

inline RunRecord run_pipeline(std::string_view article, std::string_view focal, const SupplyGraph& graph,
                              const PipelineConfig& config, std::string article_ref = "inline") {
  config.validate();
  if (text::trim(focal).empty()) throw Error(ErrorCode::kEmptyInput, "focal company is empty");
  auto resolved = resolve_entity(focal, graph);
  if (!resolved.id) throw Error(ErrorCode::kUnknownEntity, "cannot resolve focal company '" + std::string(focal) + "'");

  RunRecord r;
  r.run_id = new_run_id();
  r.created = utc_timestamp();
  r.focal = *resolved.id;
  r.focal_name = graph.company(*resolved.id).name;
  r.article_ref = std::move(article_ref);
  r.article = std::string(article);
  r.settings = config.settings;
  r.settings.max_tier = config.max_tier;
  r.settings.sourcing_depth = config.sourcing_depth;
  if (r.settings.backend.empty()) r.settings.backend = config.extraction.name;
  detail::skip_from(r, 0, "not started");

  // 1: extraction
  {
    detail::StageTimer timer;
    try {
      r.o1_report = extract_report(article, r.focal_name, config.extraction);
      r.status[Stage::kExtraction] = {StageState::kSucceeded, "", timer.millis()};
    } catch (const std::exception& e) {
      r.status[Stage::kExtraction] = {StageState::kFailed, e.what(), timer.millis()};
      detail::skip_from(r, 1, "upstream stage o1_report failed");
      return r;
    }
  }

  // 2: graph query
  {
    detail::StageTimer timer;
    try {
      r.o2_paths = r.o1_report->is_event()
                       ? disrupted_paths(graph, r.focal, r.o1_report->criteria(), config.max_tier)
                       : std::vector<DisruptedPath>{};
      r.status[Stage::kGraphQuery] = {StageState::kSucceeded, "", timer.millis()};
    } catch (const std::exception& e) {
      r.status[Stage::kGraphQuery] = {StageState::kFailed, e.what(), timer.millis()};
      detail::skip_from(r, 2, "upstream stage o2_paths failed");
      return r;
    }
  }

  // 3: enrichment, never fatal
  {
    detail::StageTimer timer;
    const SearchBackend* search = config.search ? &*config.search : nullptr;
    auto enriched = enrich_paths(*r.o2_paths, config.catalog, search, &graph);
    for (const auto& w : enriched.warnings) r.warnings.push_back(w.supplier + " -> " + w.customer + ": " + w.message);
    r.o3_enriched = std::move(enriched.paths);
    r.status[Stage::kEnrichment] = {StageState::kSucceeded, "", timer.millis()};
  }

  // 5: risk
  {
    detail::StageTimer timer;
    try {
      AssessOptions opts;
      opts.max_tier = config.max_tier;
      opts.weights = config.weights;
      opts.thresholds = config.thresholds;
      r.o5_assessment = assess(graph, r.focal, *r.o2_paths, opts);
      r.o5_assessment->run_id = r.run_id;
      r.status[Stage::kRisk] = {StageState::kSucceeded, "", timer.millis()};
    } catch (const std::exception& e) {
      r.status[Stage::kRisk] = {StageState::kFailed, e.what(), timer.millis()};
      detail::skip_from(r, 4, "upstream stage o5_assessment failed");
      return r;
    }
  }

  // 6: decision
  {
    detail::StageTimer timer;
    try {
      r.o6_plan = decide(*r.o5_assessment, *r.o1_report, config.narrative);
      r.status[Stage::kDecision] = {StageState::kSucceeded, "", timer.millis()};
    } catch (const std::exception& e) {
      r.status[Stage::kDecision] = {StageState::kFailed, e.what(), timer.millis()};
      detail::skip_from(r, 5, "upstream stage o6_plan failed");
      return r;
    }
  }

  if (config.review_mode == ReviewMode::kAutoApprove) {
    r.o6_plan = review(*r.o6_plan, Approve{}, config.auto_reviewer);
  }
  run_sourcing(r, graph, config);
  return r;
}

// Applies a reviewer verdict and, once the plan is released, runs sourcing.
inline RunRecord apply_review(RunRecord r, const Verdict& verdict, std::string_view reviewer, const SupplyGraph& graph,
                              const PipelineConfig& config) {
  if (!r.o6_plan) throw Error(ErrorCode::kInvalidTransition, "run " + r.run_id + " has no action plan to review");
  r.o6_plan = review(*r.o6_plan, verdict, reviewer);
  r.o7_sourcing.reset();
  run_sourcing(r, graph, config);
  return r;
}

// Renderer-agnostic network document: nodes with tier and optional risk
// fields, supplier -> customer edges with optional product labels.
inline nlohmann::json export_viz(const RunRecord& r, const SupplyGraph* graph = nullptr) {
  const auto& paths = r.o3_enriched ? *r.o3_enriched : r.o2_paths.value_or(std::vector<DisruptedPath>{});
  if (!r.o2_paths || paths.empty()) throw Error(ErrorCode::kRunLacksPaths, "run " + r.run_id + " has no disrupted paths");

  struct NodeInfo {
    int tier;
    std::string country, industry;
  };
  std::map<std::string, NodeInfo> nodes;
  std::map<std::pair<std::string, std::string>, std::optional<std::string>> edges;
  std::set<std::string> disrupted;
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      auto [it, fresh] = nodes.emplace(p.nodes[i].id, NodeInfo{static_cast<int>(i), p.nodes[i].country, p.nodes[i].industry});
      if (!fresh) it->second.tier = std::min(it->second.tier, static_cast<int>(i));
      if (i + 1 < p.nodes.size()) {
        std::optional<std::string> product;
        if (i < p.products.size()) product = p.products[i];
        auto& slot = edges[{p.nodes[i + 1].id, p.nodes[i].id}];
        if (!slot) slot = product;
      }
    }
    if (!p.nodes.empty()) disrupted.insert(p.nodes.back().id);
  }
  std::map<std::string, const SupplierRisk*> risk;
  if (r.o5_assessment) {
    for (const auto& s : r.o5_assessment->suppliers) risk[s.supplier] = &s;
  }

  std::vector<std::pair<std::string, NodeInfo>> ordered(nodes.begin(), nodes.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second.tier < b.second.tier; });
  nlohmann::json jn = nlohmann::json::array();
  for (const auto& [id, info] : ordered) {
    std::string label = id;
    if (graph) {
      if (auto idx = graph->find(id)) label = graph->company(*idx).name;
    }
    if (id == r.focal && !r.focal_name.empty()) label = r.focal_name;
    nlohmann::json n{{"id", id},
                     {"label", label},
                     {"country", info.country},
                     {"industry", info.industry},
                     {"tier", info.tier},
                     {"disrupted", disrupted.count(id) > 0}};
    if (auto it = risk.find(id); it != risk.end()) {
      n["risk_level"] = to_string(it->second->level);
      n["risk_score"] = round6(it->second->score);
    }
    jn.push_back(std::move(n));
  }
  nlohmann::json je = nlohmann::json::array();
  for (const auto& [key, product] : edges) {
    nlohmann::json e{{"from", key.first}, {"to", key.second}};
    if (product) e["product"] = *product;
    je.push_back(std::move(e));
  }
  return {{"run_id", r.run_id}, {"focal", r.focal}, {"nodes", std::move(jn)}, {"edges", std::move(je)}};
}

}  // namespace tierwatch
