#pragma once

// Hand-computed confusion fixtures for the four matchers. Each expected
// count and ratio below was worked out by hand; the matchers are only run,
// never consulted, to produce them.

#include <string>
#include <vector>

#include "tierwatch/eval_harness.hpp"

namespace metric_fixtures {

struct Fixture {
  std::string name;
  tierwatch::eval::ConfusionCounts got;
  tierwatch::eval::MetricSet got_metrics;
  tierwatch::eval::ConfusionCounts want;
  double want_p, want_r, want_f1;
};

inline tierwatch::DisruptedPath path_of(const std::vector<std::string>& ids) {
  tierwatch::DisruptedPath p;
  for (const auto& id : ids) p.nodes.push_back({id, "Country " + id, "Industry " + id});
  p.disrupted_tier = static_cast<int>(ids.size()) - 1;
  return p;
}

inline tierwatch::RiskAssessment risk_of(const std::vector<std::pair<std::string, double>>& scores) {
  tierwatch::RiskAssessment a;
  for (const auto& [id, s] : scores) {
    tierwatch::SupplierRisk r;
    r.supplier = id;
    r.name = id;
    r.score = s;
    a.suppliers.push_back(r);
  }
  return a;
}

inline tierwatch::ActionPlan plan_of(const std::vector<std::pair<std::string, tierwatch::Action>>& items) {
  tierwatch::ActionPlan p;
  for (const auto& [id, a] : items) {
    tierwatch::ActionItem i;
    i.supplier = id;
    i.supplier_name = id;
    i.action = a;
    p.items.push_back(i);
  }
  return p;
}

inline std::vector<Fixture> all() {
  using namespace tierwatch;
  using namespace tierwatch::eval;
  std::vector<Fixture> out;

  auto entity = [&](std::string name, std::vector<std::string> pred, std::vector<std::string> gold, ConfusionCounts want,
                    double p, double r, double f1) {
    DisruptionReport rep;
    rep.countries = std::move(pred);
    GoldEntities g;
    g.countries = std::move(gold);
    auto e = entity_confusion(rep, g);
    out.push_back({std::move(name), e.countries, e.country_metrics, want, p, r, f1});
  };
  entity("entities identical", {"Russia", "Ukraine"}, {"russia", "Ukraine "}, {2, 0, 0}, 1.0, 1.0, 1.0);
  entity("entities one missed", {"Russia"}, {"Russia", "Ukraine"}, {1, 0, 1}, 1.0, 0.5, 2.0 / 3.0);
  entity("entities one wrong", {"Russia", "Poland"}, {"Russia", "Ukraine"}, {1, 1, 1}, 0.5, 0.5, 0.5);

  auto paths = [&](std::string name, std::vector<DisruptedPath> pred, std::vector<DisruptedPath> gold,
                   ConfusionCounts want, double p, double r, double f1) {
    auto e = match_paths(pred, gold);
    out.push_back({std::move(name), e.pooled, e.pooled_metrics, want, p, r, f1});
  };
  paths("path identical, reordered", {path_of({"A", "B", "C"})}, {path_of({"A", "C", "B"})}, {1, 0, 0}, 1.0, 1.0, 1.0);
  paths("path jaccard 2/4", {path_of({"A", "B", "C"})}, {path_of({"A", "B", "D"})}, {0, 1, 1}, 0.0, 0.0, 0.0);
  paths("path jaccard 9/11 near miss", {path_of({"n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8", "x9"})},
        {path_of({"n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8", "y9"})}, {0, 1, 1}, 0.0, 0.0, 0.0);

  auto risk = [&](std::string name, RiskAssessment pred, std::map<std::string, double> gold, ConfusionCounts want,
                  double p, double r, double f1) {
    auto m = match_risk(pred, gold);
    out.push_back({std::move(name), m.counts, m.metrics, want, p, r, f1});
  };
  risk("risk within tolerance", risk_of({{"JM", 0.62}}), {{"JM", 0.58}}, {1, 0, 0}, 1.0, 1.0, 1.0);
  risk("risk outside tolerance", risk_of({{"JM", 0.75}}), {{"JM", 0.58}}, {0, 1, 0}, 0.0, 0.0, 0.0);
  // |0.68 - 0.58| = 0.1 exactly in decimal is inside; 0.6801 is outside.
  risk("risk tolerance boundary", risk_of({{"JM", 0.68}, {"Umicore", 0.6801}}), {{"JM", 0.58}, {"Umicore", 0.58}},
       {1, 1, 0}, 0.5, 1.0, 2.0 / 3.0);
  risk("risk nothing predicted", risk_of({}), {{"JM", 0.58}}, {0, 0, 1}, 0.0, 0.0, 0.0);

  auto decisions = [&](std::string name, ActionPlan plan, std::map<std::string, Action> gold, ConfusionCounts want,
                       double p, double r, double f1) {
    auto m = match_decisions(plan, gold);
    out.push_back({std::move(name), m.counts, m.metrics, want, p, r, f1});
  };
  decisions("decisions one of two wrong", plan_of({{"JM", Action::kReplace}, {"Siemens", Action::kReplace}}),
            {{"JM", Action::kReplace}, {"Siemens", Action::kIncreaseMonitoring}}, {1, 1, 0}, 0.5, 1.0, 2.0 / 3.0);
  decisions("decisions empty plan", plan_of({}), {{"JM", Action::kReplace}, {"Siemens", Action::kReplace}}, {0, 0, 2},
            0.0, 0.0, 0.0);
  return out;
}

}  // namespace metric_fixtures
