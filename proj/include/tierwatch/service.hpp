#pragma once

// HTTP API over the run store:
//   POST /runs                {article, focal}        -> {run_id}
//   GET  /runs                                        -> {runs: [ids, newest first]}
//   GET  /runs/{id}                                   -> run record
//   POST /runs/{id}/review    {verdict, reviewer, edits|items}
//   GET  /runs/{id}/viz                               -> visualization document
//   GET  /health
// Errors are {"code": <machine code>, "message": <text>}.

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "tierwatch/decision_policy.hpp"
#include "tierwatch/error.hpp"
#include "tierwatch/pipeline.hpp"
#include "tierwatch/run_record.hpp"
#include "tierwatch/supply_graph.hpp"

namespace tierwatch {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kInvalidTransition: return 409;
    case ErrorCode::kRunLacksPaths: return 409;
    case ErrorCode::kCorruptRecord:
    case ErrorCode::kIo: return 500;
    case ErrorCode::kBackendTimeout:
    case ErrorCode::kBackendFailure: return 502;
    default: return 400;
  }
}

class Service {
 public:
  Service(std::shared_ptr<const SupplyGraph> graph, PipelineConfig config, RunStore store)
      : graph_(std::move(graph)), config_(std::move(config)), store_(std::move(store)) {
    config_.validate();
  }

  void mount(httplib::Server& server) {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}, {"companies", graph_->size()}, {"edges", graph_->edges().size()}});
    });

    server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto body = parse_body(req);
        if (!body.contains("article") || !body["article"].is_string() || !body.contains("focal") ||
            !body["focal"].is_string()) {
          throw Error(ErrorCode::kInvalidInput, "body requires string fields 'article' and 'focal'");
        }
        auto ref = body.value("article_ref", std::string("api"));
        auto record = run_pipeline(body["article"].get<std::string>(), body["focal"].get<std::string>(), *graph_,
                                   config_, ref);
        store_.persist(record);
        reply(res, 201, {{"run_id", record.run_id}});
      });
    });

    server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, {{"runs", store_.list()}}); });
    });

    server.Get(R"(/runs/([A-Za-z0-9_\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, to_json(store_.load(req.matches[1].str()))); });
    });

    server.Get(R"(/runs/([A-Za-z0-9_\-]+)/viz)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, export_viz(store_.load(req.matches[1].str()), graph_.get())); });
    });

    server.Post(R"(/runs/([A-Za-z0-9_\-]+)/review)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto body = parse_body(req);
        auto verdict = verdict_from_json(body);
        auto reviewer = body.value("reviewer", std::string());
        auto record = review_run(req.matches[1].str(), verdict, reviewer);
        reply(res, 200, to_json(record));
      });
    });
  }

  // Review transitions are serialized per run: the first verdict on a pending
  // plan wins and later ones see the new state.
  RunRecord review_run(const std::string& run_id, const Verdict& verdict, const std::string& reviewer) {
    auto lock = lock_run(run_id);
    auto record = store_.load(run_id);
    auto updated = apply_review(std::move(record), verdict, reviewer, *graph_, config_);
    store_.persist(updated);
    return updated;
  }

  const RunStore& store() const { return store_; }

 private:
  std::unique_lock<std::mutex> lock_run(const std::string& id) {
    std::lock_guard guard(locks_mutex_);
    auto& m = run_locks_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return std::unique_lock<std::mutex>(*m);
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    auto doc = nlohmann::json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::kInvalidInput, "request body must be a JSON object");
    return doc;
  }

  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      reply(res, http_status(e.code()), {{"code", to_string(e.code())}, {"message", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"code", "internal"}, {"message", e.what()}});
    }
  }

  std::shared_ptr<const SupplyGraph> graph_;
  PipelineConfig config_;
  RunStore store_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> run_locks_;
};

}  // namespace tierwatch
