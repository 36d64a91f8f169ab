#pragma once

// Scoring pipeline outputs against ground truth: entity confusion, Jaccard
// path matching, risk tolerance matching, decision alignment, macro
// aggregation and rubric weighted means.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tierwatch/decision_policy.hpp"
#include "tierwatch/error.hpp"
#include "tierwatch/extraction.hpp"
#include "tierwatch/risk_engine.hpp"
#include "tierwatch/run_record.hpp"
#include "tierwatch/supply_graph.hpp"
#include "tierwatch/text.hpp"

namespace tierwatch::eval {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricSet {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool vacuous = false;  // empty prediction against empty gold

  bool operator==(const MetricSet&) const = default;
};

// Empty vs empty scores 1 (perfect rejection); otherwise an undefined ratio
// is 0, and F1 is 0 when P + R = 0.
inline MetricSet metrics(const ConfusionCounts& c) {
  MetricSet m;
  if (c.tp + c.fp + c.fn == 0) {
    m.precision = m.recall = m.f1 = 1.0;
    m.vacuous = true;
    return m;
  }
  const auto tp = static_cast<double>(c.tp);
  m.precision = c.tp + c.fp > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

inline MetricSet mean_metrics(const std::vector<MetricSet>& v) {
  if (v.empty()) return metrics({});
  MetricSet m;
  bool all_vacuous = true;
  for (const auto& x : v) {
    m.precision += x.precision;
    m.recall += x.recall;
    m.f1 += x.f1;
    all_vacuous = all_vacuous && x.vacuous;
  }
  const auto n = static_cast<double>(v.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  m.vacuous = all_vacuous;
  return m;
}

struct MatchResult {
  ConfusionCounts counts;
  MetricSet metrics;
  std::vector<std::string> details;
};

// ---------------------------------------------------------------------------
// Entities

struct GoldEntities {
  std::optional<DisruptionType> disruption_type;
  std::vector<std::string> countries;
  std::vector<std::string> industries;
  std::vector<std::string> companies;
};

struct EntityEvaluation {
  ConfusionCounts countries, industries, companies;
  MetricSet country_metrics, industry_metrics, company_metrics;
  MetricSet averaged;  // arithmetic mean over the three kinds
  std::optional<bool> type_matches;
};

namespace detail {

inline ConfusionCounts set_confusion(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
                                     bool company) {
  auto key = [company](const std::string& s) { return company ? text::normalize_company(s) : text::normalize_key(s); };
  std::set<std::string> p, g;
  for (const auto& s : predicted) {
    if (auto k = key(s); !k.empty()) p.insert(k);
  }
  for (const auto& s : gold) {
    if (auto k = key(s); !k.empty()) g.insert(k);
  }
  ConfusionCounts c;
  for (const auto& k : p) (g.count(k) ? c.tp : c.fp)++;
  for (const auto& k : g) c.fn += p.count(k) ? 0 : 1;
  return c;
}

}  // namespace detail

// Exact match after normalization; anything else predicted is an FP.
inline EntityEvaluation entity_confusion(const DisruptionReport& predicted, const GoldEntities& gold) {
  EntityEvaluation e;
  e.countries = detail::set_confusion(predicted.countries, gold.countries, false);
  e.industries = detail::set_confusion(predicted.industries, gold.industries, false);
  e.companies = detail::set_confusion(predicted.companies, gold.companies, true);
  e.country_metrics = metrics(e.countries);
  e.industry_metrics = metrics(e.industries);
  e.company_metrics = metrics(e.companies);
  e.averaged = mean_metrics({e.country_metrics, e.industry_metrics, e.company_metrics});
  if (gold.disruption_type) e.type_matches = predicted.disruption_type == *gold.disruption_type;
  return e;
}

// ---------------------------------------------------------------------------
// Paths

using NodeTriple = std::tuple<std::string, std::string, std::string>;

inline std::set<NodeTriple> path_node_set(const DisruptedPath& p) {
  std::set<NodeTriple> out;
  for (const auto& n : p.nodes) {
    out.emplace(text::normalize_company(n.id), text::normalize_key(n.country), text::normalize_key(n.industry));
  }
  return out;
}

inline double jaccard(const std::set<NodeTriple>& a, const std::set<NodeTriple>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

struct PathEvaluation {
  std::map<int, ConfusionCounts> per_tier;
  std::map<int, MetricSet> per_tier_metrics;
  MetricSet tier_mean;      // unweighted mean over tiers present in either side
  ConfusionCounts pooled;
  MetricSet pooled_metrics;  // counts summed over tiers
  std::size_t matched_pairs = 0;
};

namespace detail {

// Greedy one-to-one assignment in descending similarity; ties by index.
inline ConfusionCounts greedy_match(const std::vector<std::set<NodeTriple>>& pred,
                                    const std::vector<std::set<NodeTriple>>& gold, double threshold) {
  struct Pair {
    double sim;
    std::size_t p, g;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gold.size(); ++j) {
      double s = jaccard(pred[i], gold[j]);
      if (s >= threshold) pairs.push_back({s, i, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return std::tie(a.p, a.g) < std::tie(b.p, b.g);
  });
  std::vector<bool> pu(pred.size()), gu(gold.size());
  ConfusionCounts c;
  for (const auto& pr : pairs) {
    if (pu[pr.p] || gu[pr.g]) continue;
    pu[pr.p] = gu[pr.g] = true;
    ++c.tp;
  }
  c.fp = pred.size() - c.tp;
  c.fn = gold.size() - c.tp;
  return c;
}

}  // namespace detail

inline PathEvaluation match_paths(const std::vector<DisruptedPath>& predicted, const std::vector<DisruptedPath>& gold,
                                  double threshold = 0.9) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "path match threshold must lie in (0, 1]");
  }
  std::map<int, std::pair<std::vector<std::set<NodeTriple>>, std::vector<std::set<NodeTriple>>>> by_tier;
  for (const auto& p : predicted) by_tier[p.disrupted_tier].first.push_back(path_node_set(p));
  for (const auto& g : gold) by_tier[g.disrupted_tier].second.push_back(path_node_set(g));

  PathEvaluation e;
  std::vector<MetricSet> tier_metrics;
  for (const auto& [tier, sides] : by_tier) {
    auto c = detail::greedy_match(sides.first, sides.second, threshold);
    e.per_tier[tier] = c;
    e.per_tier_metrics[tier] = metrics(c);
    tier_metrics.push_back(metrics(c));
    e.pooled += c;
    e.matched_pairs += c.tp;
  }
  e.tier_mean = mean_metrics(tier_metrics);
  e.pooled_metrics = metrics(e.pooled);
  return e;
}

// ---------------------------------------------------------------------------
// Risk and decisions

// Absolute slack on the tolerance comparison so that decimal boundaries such
// as |0.68 - 0.58| count as within 0.1.
inline constexpr double kToleranceSlack = 1e-9;

namespace detail {

inline bool same_supplier(const std::string& gold_key, const std::string& id, const std::string& name) {
  auto k = text::normalize_company(gold_key);
  return k == text::normalize_company(id) || k == text::normalize_company(name);
}

}  // namespace detail

inline MatchResult match_risk(const RiskAssessment& predicted, const std::map<std::string, double>& gold,
                              double tolerance = 0.1) {
  MatchResult r;
  std::set<std::string> matched_gold;
  for (const auto& s : predicted.suppliers) {
    auto it = std::find_if(gold.begin(), gold.end(),
                           [&](const auto& g) { return detail::same_supplier(g.first, s.supplier, s.name); });
    if (it == gold.end()) {
      ++r.counts.fp;
      r.details.push_back(s.supplier + ": not in gold");
      continue;
    }
    matched_gold.insert(it->first);
    const double delta = std::abs(s.score - it->second);
    if (delta <= tolerance + kToleranceSlack) {
      ++r.counts.tp;
    } else {
      ++r.counts.fp;
      r.details.push_back(s.supplier + ": score off by " + tierwatch::detail::fixed(delta, 6));
    }
  }
  for (const auto& [key, score] : gold) {
    if (!matched_gold.count(key)) {
      ++r.counts.fn;
      r.details.push_back(key + ": missed");
    }
  }
  r.metrics = metrics(r.counts);
  return r;
}

// Addressed with the gold action is TP, addressed with another action is FP,
// not addressed is FN.
inline MatchResult match_decisions(const ActionPlan& plan, const std::map<std::string, Action>& gold) {
  MatchResult r;
  std::set<std::string> matched_gold;
  for (const auto& item : plan.items) {
    auto it = std::find_if(gold.begin(), gold.end(), [&](const auto& g) {
      return detail::same_supplier(g.first, item.supplier, item.supplier_name);
    });
    if (it == gold.end()) {
      ++r.counts.fp;
      r.details.push_back(item.supplier + ": not in gold");
      continue;
    }
    matched_gold.insert(it->first);
    if (item.action == it->second) {
      ++r.counts.tp;
    } else {
      ++r.counts.fp;
      r.details.push_back(item.supplier + ": " + std::string(to_string(item.action)) + " instead of " +
                          std::string(to_string(it->second)));
    }
  }
  for (const auto& [key, action] : gold) {
    if (!matched_gold.count(key)) {
      ++r.counts.fn;
      r.details.push_back(key + ": not addressed");
    }
  }
  r.metrics = metrics(r.counts);
  return r;
}

// ---------------------------------------------------------------------------
// Macro aggregation

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct MacroSummary {
  MeanStd precision, recall, f1;
  std::size_t n = 0;
  bool std_undefined = false;  // n == 1, std reported as 0
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

inline MacroSummary macro(const std::vector<MetricSet>& values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidInput, "macro aggregation needs at least one metric set");
  std::vector<double> p, r, f;
  for (const auto& v : values) {
    p.push_back(v.precision);
    r.push_back(v.recall);
    f.push_back(v.f1);
  }
  MacroSummary s;
  s.n = values.size();
  s.precision = mean_std(p);
  s.recall = mean_std(r);
  s.f1 = mean_std(f);
  s.std_undefined = values.size() < 2;
  return s;
}

// ---------------------------------------------------------------------------
// Qualitative rubric

enum class RubricSection { kDisruptionSummary, kNetworkImpact, kReplacementRecs };

inline const std::map<std::string, double>& rubric_weights(RubricSection s) {
  static const std::map<std::string, double> kSummary{{"completeness", 0.4}, {"clarity", 0.3}, {"relevance", 0.3}};
  static const std::map<std::string, double> kImpact{{"completeness", 0.4}, {"accuracy", 0.4}, {"insightfulness", 0.2}};
  static const std::map<std::string, double> kRecs{{"completeness", 0.4}, {"accuracy", 0.4}, {"actionability", 0.2}};
  switch (s) {
    case RubricSection::kDisruptionSummary: return kSummary;
    case RubricSection::kNetworkImpact: return kImpact;
    case RubricSection::kReplacementRecs: return kRecs;
  }
  return kSummary;
}

inline double rubric_weighted_mean(RubricSection section, const std::map<std::string, double>& scores) {
  const auto& weights = rubric_weights(section);
  for (const auto& [criterion, score] : scores) {
    if (!weights.count(criterion)) throw Error(ErrorCode::kMissingCriterion, "unknown rubric criterion '" + criterion + "'");
    if (!(score >= 0.0 && score <= 1.0)) throw Error(ErrorCode::kOutOfRange, "rubric score must lie in [0, 1]");
  }
  double total = 0.0;
  for (const auto& [criterion, weight] : weights) {
    auto it = scores.find(criterion);
    if (it == scores.end()) throw Error(ErrorCode::kMissingCriterion, "missing rubric criterion '" + criterion + "'");
    total += weight * it->second;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Scenarios

struct ScenarioGold {
  GoldEntities entities;
  std::vector<DisruptedPath> paths;
  std::map<std::string, double> risk;
  std::map<std::string, Action> decisions;
};

struct ScenarioCase {
  std::string id;
  std::string focal;
  std::string article;
  ScenarioGold gold;
  bool expected_positive = true;
};

inline ScenarioCase scenario_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedDocument, "scenario must be an object");
  ScenarioCase s;
  s.id = tierwatch::detail::require_string(doc, "id", "scenario");
  s.focal = tierwatch::detail::require_string(doc, "focal", s.id);
  s.article = tierwatch::detail::require_string(doc, "article", s.id);
  s.expected_positive = doc.value("expected_positive", true);
  if (!doc.contains("gold") || !doc["gold"].is_object()) throw Error(ErrorCode::kMalformedDocument, s.id + ": missing gold");
  const auto& g = doc["gold"];
  if (g.contains("disruption_type") && g["disruption_type"].is_string()) {
    s.gold.entities.disruption_type = parse_disruption_type(g["disruption_type"].get<std::string>());
    if (!s.gold.entities.disruption_type) throw Error(ErrorCode::kMalformedDocument, s.id + ": unknown gold disruption type");
  }
  auto strings = [&](const char* key) {
    if (!g.contains(key)) return std::vector<std::string>{};
    if (!g[key].is_array()) throw Error(ErrorCode::kMalformedDocument, s.id + ": gold." + key + " must be an array");
    return g[key].get<std::vector<std::string>>();
  };
  s.gold.entities.countries = strings("countries");
  s.gold.entities.industries = strings("industries");
  s.gold.entities.companies = strings("companies");
  if (g.contains("paths")) s.gold.paths = paths_from_json(g["paths"]);
  if (g.contains("risk")) {
    if (!g["risk"].is_object()) throw Error(ErrorCode::kMalformedDocument, s.id + ": gold.risk must be an object");
    for (const auto& [k, v] : g["risk"].items()) {
      if (!v.is_number()) throw Error(ErrorCode::kMalformedDocument, s.id + ": gold.risk values must be numbers");
      s.gold.risk[k] = v.get<double>();
    }
  }
  if (g.contains("decisions")) {
    if (!g["decisions"].is_object()) throw Error(ErrorCode::kMalformedDocument, s.id + ": gold.decisions must be an object");
    for (const auto& [k, v] : g["decisions"].items()) {
      auto a = v.is_string() ? parse_action(v.get<std::string>()) : std::nullopt;
      if (!a) throw Error(ErrorCode::kMalformedDocument, s.id + ": unknown gold action for '" + k + "'");
      s.gold.decisions[k] = *a;
    }
  }
  if (!s.expected_positive && !s.gold.paths.empty()) {
    throw Error(ErrorCode::kMalformedDocument, s.id + ": a negative scenario cannot have gold paths");
  }
  return s;
}

inline nlohmann::json to_json(const ScenarioCase& s) {
  nlohmann::json gold{{"countries", s.gold.entities.countries},
                      {"industries", s.gold.entities.industries},
                      {"companies", s.gold.entities.companies},
                      {"paths", tierwatch::to_json(s.gold.paths)}};
  if (s.gold.entities.disruption_type) gold["disruption_type"] = to_string(*s.gold.entities.disruption_type);
  gold["risk"] = nlohmann::json::object();
  for (const auto& [k, v] : s.gold.risk) gold["risk"][k] = v;
  gold["decisions"] = nlohmann::json::object();
  for (const auto& [k, v] : s.gold.decisions) gold["decisions"][k] = to_string(v);
  return {{"id", s.id},
          {"focal", s.focal},
          {"article", s.article},
          {"expected_positive", s.expected_positive},
          {"gold", std::move(gold)}};
}

// Gold must reference entities of the graph the run is evaluated on.
inline void check_scenario(const ScenarioCase& s, const SupplyGraph& graph) {
  if (!graph.contains(s.focal) && !resolve_entity(s.focal, graph).matched()) {
    throw Error(ErrorCode::kScenarioMismatch, s.id + ": focal '" + s.focal + "' not in graph");
  }
  for (const auto& p : s.gold.paths) {
    for (const auto& n : p.nodes) {
      if (!graph.contains(n.id)) {
        throw Error(ErrorCode::kScenarioMismatch, s.id + ": gold path references unknown company '" + n.id + "'");
      }
    }
  }
}

inline std::vector<ScenarioCase> load_scenarios(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, "scenario directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioCase> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::kMalformedDocument, "scenario file '" + f.string() + "' does not parse");
    out.push_back(scenario_from_json(doc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-run evaluation

struct RunEvaluation {
  std::string scenario_id;
  std::string run_id;
  EntityEvaluation entities;
  PathEvaluation paths;
  MatchResult risk;
  MatchResult decisions;

  // The four evaluated agents, in pipeline order.
  MetricSet extraction() const { return entities.averaged; }
  MetricSet graph_query() const { return paths.tier_mean; }
  MetricSet risk_manager() const { return risk.metrics; }
  MetricSet csco() const { return decisions.metrics; }
};

// Stages that failed or never ran contribute empty predictions, so their gold
// items count as misses downstream.
inline RunEvaluation evaluate_run(const RunRecord& run, const ScenarioCase& scenario) {
  auto focal_key = text::normalize_company(scenario.focal);
  if (focal_key != text::normalize_company(run.focal) && focal_key != text::normalize_company(run.focal_name)) {
    throw Error(ErrorCode::kScenarioMismatch, "scenario " + scenario.id + " targets '" + scenario.focal +
                                                  "' but run " + run.run_id + " monitored '" + run.focal + "'");
  }
  RunEvaluation e;
  e.scenario_id = scenario.id;
  e.run_id = run.run_id;
  e.entities = entity_confusion(run.o1_report.value_or(DisruptionReport{}), scenario.gold.entities);
  e.paths = match_paths(run.o2_paths.value_or(std::vector<DisruptedPath>{}), scenario.gold.paths);
  e.risk = match_risk(run.o5_assessment.value_or(RiskAssessment{}), scenario.gold.risk);
  e.decisions = match_decisions(run.o6_plan.value_or(ActionPlan{}), scenario.gold.decisions);
  return e;
}

inline nlohmann::json to_json(const MetricSet& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"vacuous", m.vacuous}};
}

inline nlohmann::json to_json(const ConfusionCounts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

inline nlohmann::json to_json(const MacroSummary& s) {
  auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  return {{"n", s.n}, {"precision", ms(s.precision)}, {"recall", ms(s.recall)}, {"f1", ms(s.f1)},
          {"std_undefined", s.std_undefined}};
}

inline nlohmann::json to_json(const RunEvaluation& e) {
  nlohmann::json tiers = nlohmann::json::object();
  for (const auto& [tier, c] : e.paths.per_tier) {
    tiers[std::to_string(tier)] = {{"counts", to_json(c)}, {"metrics", to_json(e.paths.per_tier_metrics.at(tier))}};
  }
  nlohmann::json doc{
      {"scenario", e.scenario_id},
      {"run_id", e.run_id},
      {"extraction",
       {{"countries", to_json(e.entities.countries)},
        {"industries", to_json(e.entities.industries)},
        {"companies", to_json(e.entities.companies)},
        {"metrics", to_json(e.entities.averaged)}}},
      {"graph_query",
       {{"per_tier", std::move(tiers)},
        {"tier_mean", to_json(e.paths.tier_mean)},
        {"pooled", {{"counts", to_json(e.paths.pooled)}, {"metrics", to_json(e.paths.pooled_metrics)}}}}},
      {"risk_manager", {{"counts", to_json(e.risk.counts)}, {"metrics", to_json(e.risk.metrics)}, {"details", e.risk.details}}},
      {"csco",
       {{"counts", to_json(e.decisions.counts)}, {"metrics", to_json(e.decisions.metrics)}, {"details", e.decisions.details}}}};
  if (e.entities.type_matches) doc["extraction"]["type_matches"] = *e.entities.type_matches;
  return doc;
}

struct SuiteSummary {
  MacroSummary extraction, graph_query, risk_manager, csco;
};

inline SuiteSummary summarize(const std::vector<RunEvaluation>& evals) {
  std::vector<MetricSet> a, b, c, d;
  for (const auto& e : evals) {
    a.push_back(e.extraction());
    b.push_back(e.graph_query());
    c.push_back(e.risk_manager());
    d.push_back(e.csco());
  }
  return {macro(a), macro(b), macro(c), macro(d)};
}

// Agent x {P, R, F1} as mean ± std.
inline std::string summary_table(const SuiteSummary& s) {
  auto cell = [](const MeanStd& m) { return tierwatch::detail::fixed(m.mean, 3) + " ± " + tierwatch::detail::fixed(m.std, 3); };
  std::string out = "| Agent | Precision | Recall | F1 |\n|---|---|---|---|\n";
  auto row = [&](const char* name, const MacroSummary& m) {
    out += std::string("| ") + name + " | " + cell(m.precision) + " | " + cell(m.recall) + " | " + cell(m.f1) + " |\n";
  };
  row("Disruption Monitoring", s.extraction);
  row("Knowledge Graph Query", s.graph_query);
  row("Risk Manager", s.risk_manager);
  row("CSCO", s.csco);
  return out;
}

inline nlohmann::json to_json(const SuiteSummary& s) {
  return {{"extraction", to_json(s.extraction)},
          {"graph_query", to_json(s.graph_query)},
          {"risk_manager", to_json(s.risk_manager)},
          {"csco", to_json(s.csco)}};
}

}  // namespace tierwatch::eval
