#pragma once

// Runs the bundled synthetic scenarios through the rule backend.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "tierwatch/config.hpp"
#include "tierwatch/eval_harness.hpp"
#include "tierwatch/pipeline.hpp"

namespace suite {

inline std::filesystem::path dir() { return fixtures::data_dir() / "synthetic"; }

inline tierwatch::SupplyGraph graph() { return tierwatch::load_graph_file((dir() / "graph.json").string()); }

inline std::vector<tierwatch::eval::ScenarioCase> scenarios() { return tierwatch::eval::load_scenarios(dir() / "scenarios"); }

inline tierwatch::PipelineConfig config(const tierwatch::SupplyGraph& g) {
  return tierwatch::load_pipeline_config(tierwatch::DataFiles::in_directory(dir()), g, tierwatch::BackendKind::kRule,
                                         tierwatch::ReviewMode::kGated);
}

// Rule backend whose gazetteer lacks the given surface terms.
inline tierwatch::ExtractionBackend backend_without(const std::vector<std::string>& terms) {
  auto gaz = tierwatch::gazetteer_from_json(tierwatch::read_json_file(dir() / "gazetteer.json"));
  std::erase_if(gaz, [&](const tierwatch::GazetteerEntry& e) {
    return std::find(terms.begin(), terms.end(), e.term) != terms.end();
  });
  return tierwatch::rule_backend(gaz, tierwatch::lexicon_from_json(tierwatch::read_json_file(dir() / "lexicon.json")));
}

inline std::vector<tierwatch::eval::RunEvaluation> evaluate(const std::vector<tierwatch::eval::ScenarioCase>& cases,
                                                            const tierwatch::SupplyGraph& g,
                                                            const tierwatch::PipelineConfig& cfg) {
  std::vector<tierwatch::eval::RunEvaluation> out;
  for (const auto& sc : cases) {
    tierwatch::eval::check_scenario(sc, g);
    auto run = tierwatch::run_pipeline(sc.article, sc.focal, g, cfg, sc.id);
    out.push_back(tierwatch::eval::evaluate_run(run, sc));
  }
  return out;
}

}  // namespace suite
