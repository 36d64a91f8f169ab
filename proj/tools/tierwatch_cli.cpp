// tierwatch: command-line front end for the disruption pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "tierwatch/config.hpp"
#include "tierwatch/eval_harness.hpp"
#include "tierwatch/pipeline.hpp"
#include "tierwatch/run_record.hpp"
#include "tierwatch/service.hpp"

namespace fs = std::filesystem;
using namespace tierwatch;

namespace {

struct DataOptions {
  std::string graph;
  std::string data_dir;
  std::string gazetteer;
  std::string lexicon;
  std::string catalog;
  std::string alternatives;
  std::string search_replay;

  void add_to(CLI::App* cmd, bool graph_required) {
    auto* g = cmd->add_option("--graph", graph, "Supplier graph document");
    if (graph_required) g->required();
    cmd->add_option("--data-dir", data_dir, "Directory with gazetteer.json, lexicon.json, products.json, alternatives.json");
    cmd->add_option("--gazetteer", gazetteer, "Gazetteer table for the rule backend");
    cmd->add_option("--lexicon", lexicon, "Disruption-type lexicon for the rule backend");
    cmd->add_option("--catalog", catalog, "Product catalog for enrichment");
    cmd->add_option("--alternatives", alternatives, "Alternative-supplier catalog");
    cmd->add_option("--search-replay", search_replay, "Recorded search answers");
  }

  DataFiles resolve() const {
    fs::path dir = !data_dir.empty() ? fs::path(data_dir) : fs::path(graph).parent_path();
    auto files = DataFiles::in_directory(dir.empty() ? fs::path(".") : dir);
    files.graph = graph;
    if (!gazetteer.empty()) files.gazetteer = gazetteer;
    if (!lexicon.empty()) files.lexicon = lexicon;
    if (!catalog.empty()) files.catalog = catalog;
    if (!alternatives.empty()) files.alternatives = alternatives;
    if (!search_replay.empty()) files.search_replay = search_replay;
    return files;
  }
};

std::string default_store() { return env("TIERWATCH_STORE").value_or("runs"); }

nlohmann::json run_summary(const RunRecord& r) {
  nlohmann::json stages = nlohmann::json::object();
  for (auto s : kStages) {
    const auto& st = r.stage(s);
    stages[std::string(stage_key(s))] = st.reason.empty() ? std::string(to_string(st.state))
                                                          : std::string(to_string(st.state)) + ": " + st.reason;
  }
  nlohmann::json out{{"run_id", r.run_id}, {"focal", r.focal}, {"stages", stages}};
  if (r.o2_paths) out["paths"] = r.o2_paths->size();
  if (r.o5_assessment) {
    nlohmann::json risks = nlohmann::json::array();
    for (const auto& s : r.o5_assessment->suppliers) {
      risks.push_back({{"supplier", s.supplier}, {"score", round6(s.score)}, {"level", to_string(s.level)}});
    }
    out["risk"] = risks;
  }
  if (r.o6_plan) out["review_state"] = to_string(r.o6_plan->review_state);
  if (r.o7_sourcing) {
    nlohmann::json alts = nlohmann::json::array();
    for (const auto& o : *r.o7_sourcing) {
      for (const auto& c : o.candidates) {
        alts.push_back({{"replaces", o.supplier}, {"name", c.name}, {"validation", to_string(c.validation)}});
      }
    }
    out["alternatives"] = alts;
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supply-chain disruption detection, tier risk scoring and review workflow"};
  app.require_subcommand(1);

  // ingest-graph
  std::string ingest_file, ingest_out;
  auto* ingest = app.add_subcommand("ingest-graph", "Validate a graph document and print its summary");
  ingest->add_option("file", ingest_file, "Graph document")->required();
  ingest->add_option("--out", ingest_out, "Write the canonical form of the graph");

  // run
  DataOptions run_data;
  std::string article_file, focal, backend = "rule", store_dir = default_store(), plan_out;
  bool auto_approve = false;
  int max_tier = 4;
  auto* run = app.add_subcommand("run", "Run the pipeline on one article");
  run_data.add_to(run, true);
  run->add_option("--article", article_file, "Article text file")->required();
  run->add_option("--focal", focal, "Monitored company name or id")->required();
  run->add_option("--backend", backend, "Extraction backend")->check(CLI::IsMember({"rule", "model"}));
  run->add_flag("--auto-approve", auto_approve, "Approve the action plan without a reviewer");
  run->add_option("--max-tier", max_tier, "Deepest tier to traverse")->check(CLI::PositiveNumber);
  run->add_option("--store", store_dir, "Run store directory");
  run->add_option("--plan-out", plan_out, "Write the rendered action plan");

  // eval
  DataOptions eval_data;
  std::string scenario_dir, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate the deterministic pipeline on a scenario directory");
  eval_data.add_to(eval_cmd, true);
  eval_cmd->add_option("--scenarios", scenario_dir, "Directory of scenario documents")->required();
  eval_cmd->add_option("--out", eval_out, "Write the detailed evaluation report");

  // review
  std::string review_id, verdict_kind, edits_file, reviewer = "cli-reviewer", review_store = default_store();
  auto* review_cmd = app.add_subcommand("review", "Apply a reviewer verdict to a pending plan");
  review_cmd->add_option("run_id", review_id, "Run id")->required();
  review_cmd->add_option("--verdict", verdict_kind, "Verdict")->required()->check(CLI::IsMember({"approve", "revise", "override"}));
  review_cmd->add_option("--edits", edits_file, "Edits (revise) or replacement items (override)");
  review_cmd->add_option("--reviewer", reviewer, "Reviewer identity");
  review_cmd->add_option("--store", review_store, "Run store directory");

  // export-viz
  std::string viz_id, viz_out, viz_store = default_store();
  auto* viz = app.add_subcommand("export-viz", "Export the visualization document of a run");
  viz->add_option("run_id", viz_id, "Run id")->required();
  viz->add_option("--out", viz_out, "Output file")->required();
  viz->add_option("--store", viz_store, "Run store directory");

  // render
  std::string render_id, render_store = default_store();
  auto* render = app.add_subcommand("render", "Print the action plan of a run");
  render->add_option("run_id", render_id, "Run id")->required();
  render->add_option("--store", render_store, "Run store directory");

  // serve
  DataOptions serve_data;
  int port = 8080;
  std::string host = "127.0.0.1", serve_store = default_store(), serve_backend = "rule";
  bool serve_auto = false;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve_data.add_to(serve, true);
  serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--store", serve_store, "Run store directory");
  serve->add_option("--backend", serve_backend, "Extraction backend")->check(CLI::IsMember({"rule", "model"}));
  serve->add_flag("--auto-approve", serve_auto, "Approve plans without a reviewer");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto g = load_graph_file(ingest_file);
      nlohmann::json out{{"companies", g.size()}, {"edges", g.edges().size()}};
      if (g.focal()) out["focal"] = *g.focal();
      if (!ingest_out.empty()) write_file(ingest_out, to_json(g).dump(2) + "\n");
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*run) {
      auto files = run_data.resolve();
      auto graph = load_graph_file(files.graph);
      auto config = load_pipeline_config(files, graph, backend == "rule" ? BackendKind::kRule : BackendKind::kModel,
                                         auto_approve ? ReviewMode::kAutoApprove : ReviewMode::kGated);
      config.max_tier = max_tier;
      auto record = run_pipeline(read_text_file(article_file), focal, graph, config,
                                 fs::absolute(article_file).string());
      RunStore store(store_dir);
      store.persist(record);
      if (!plan_out.empty() && record.o6_plan) write_file(plan_out, render_plan(*record.o6_plan));
      std::cout << run_summary(record).dump(2) << "\n";
      return record.stage(Stage::kExtraction).state == StageState::kSucceeded ? 0 : 3;
    }

    if (*eval_cmd) {
      auto files = eval_data.resolve();
      auto graph = load_graph_file(files.graph);
      auto config = load_pipeline_config(files, graph, BackendKind::kRule, ReviewMode::kAutoApprove);
      std::vector<eval::RunEvaluation> evals;
      nlohmann::json details = nlohmann::json::array();
      for (const auto& sc : eval::load_scenarios(scenario_dir)) {
        eval::check_scenario(sc, graph);
        auto record = run_pipeline(sc.article, sc.focal, graph, config, "scenario:" + sc.id);
        evals.push_back(eval::evaluate_run(record, sc));
        details.push_back(eval::to_json(evals.back()));
      }
      if (evals.empty()) throw Error(ErrorCode::kInvalidInput, "no scenarios found in '" + scenario_dir + "'");
      auto summary = eval::summarize(evals);
      if (!eval_out.empty()) {
        write_file(eval_out, nlohmann::json{{"summary", eval::to_json(summary)}, {"scenarios", details}}.dump(2) + "\n");
      }
      std::cout << "Scenarios: " << evals.size() << "\n\n" << eval::summary_table(summary);
      return 0;
    }

    if (*review_cmd) {
      RunStore store(review_store);
      auto record = store.load(review_id);
      nlohmann::json body{{"verdict", verdict_kind}};
      if (verdict_kind != "approve") {
        if (edits_file.empty()) throw Error(ErrorCode::kMalformedEdits, verdict_kind + " requires --edits");
        auto doc = read_json_file(edits_file);
        const char* key = verdict_kind == "revise" ? "edits" : "items";
        body[key] = doc.is_array() ? doc : doc.value(key, nlohmann::json::array());
      }
      auto files = files_from_settings(record.settings);
      auto graph = load_graph_file(files.graph);
      auto config = load_pipeline_config(files, graph, BackendKind::kRule);
      config.max_tier = record.settings.max_tier;
      config.sourcing_depth = record.settings.sourcing_depth;
      auto updated = apply_review(std::move(record), verdict_from_json(body), reviewer, graph, config);
      store.persist(updated);
      std::cout << run_summary(updated).dump(2) << "\n";
      return 0;
    }

    if (*viz) {
      RunStore store(viz_store);
      auto record = store.load(viz_id);
      std::unique_ptr<SupplyGraph> graph;
      if (auto it = record.settings.sources.find("graph"); it != record.settings.sources.end() && fs::exists(it->second)) {
        graph = std::make_unique<SupplyGraph>(load_graph_file(it->second));
      }
      write_file(viz_out, export_viz(record, graph.get()).dump(2) + "\n");
      return 0;
    }

    if (*render) {
      RunStore store(render_store);
      auto record = store.load(render_id);
      if (!record.o6_plan) throw Error(ErrorCode::kNotFound, "run " + render_id + " has no action plan");
      std::cout << render_plan(*record.o6_plan);
      return 0;
    }

    if (*serve) {
      auto files = serve_data.resolve();
      auto graph = std::make_shared<const SupplyGraph>(load_graph_file(files.graph));
      auto config = load_pipeline_config(files, *graph, serve_backend == "rule" ? BackendKind::kRule : BackendKind::kModel,
                                         serve_auto ? ReviewMode::kAutoApprove : ReviewMode::kGated);
      Service service(graph, std::move(config), RunStore(serve_store));
      httplib::Server server;
      service.mount(server);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
