#pragma once

// Network-backed implementations of the extraction and search contracts.
// Both are configured from the environment and speak JSON over HTTP(S).

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tierwatch/enrichment.hpp"
#include "tierwatch/error.hpp"
#include "tierwatch/extraction.hpp"

namespace tierwatch {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

inline Endpoint split_url(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos) throw Error(ErrorCode::kInvalidConfig, "endpoint URL needs a scheme: " + std::string(url));
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

inline std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

namespace detail {

inline nlohmann::json post_json(const Endpoint& ep, const httplib::Headers& headers, const nlohmann::json& body,
                                std::chrono::milliseconds timeout) {
  httplib::Client cli(ep.base);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) {
    auto err = res.error();
    auto code = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) ? ErrorCode::kBackendTimeout
                                                                                           : ErrorCode::kBackendFailure;
    throw Error(code, "request to " + ep.base + ep.path + " failed: " + httplib::to_string(err));
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::kBackendFailure, "backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status >= 400) {
    throw Error(ErrorCode::kSchemaInvalid, "backend rejected request with HTTP " + std::to_string(res->status));
  }
  auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kSchemaInvalid, "backend response is not JSON");
  return doc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Chat-completions extraction backend

struct ModelConfig {
  std::string endpoint;  // full URL of the chat-completions route
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1'000};
  int max_in_flight = 4;

  // TIERWATCH_MODEL_ENDPOINT, TIERWATCH_MODEL_API_KEY, TIERWATCH_MODEL_NAME.
  static ModelConfig from_env() {
    ModelConfig c;
    auto endpoint = env("TIERWATCH_MODEL_ENDPOINT");
    auto model = env("TIERWATCH_MODEL_NAME");
    if (!endpoint || !model) {
      throw Error(ErrorCode::kInvalidConfig, "model backend needs TIERWATCH_MODEL_ENDPOINT and TIERWATCH_MODEL_NAME");
    }
    c.endpoint = *endpoint;
    c.model = *model;
    c.api_key = env("TIERWATCH_MODEL_API_KEY").value_or("");
    return c;
  }
};

inline std::string extraction_instructions() {
  return "You are a senior supply chain risk analyst. Read the news article and decide whether it describes a "
         "supply chain disruption relevant to the monitored company. Reply with one JSON object with fields: "
         "disruption_type (one of Geopolitical, TradePolicy, NaturalDisaster, EconomicCrisis, Cybersecurity, "
         "LabourStrike, CompanyBankruptcy, Other), countries, industries, companies (arrays of names explicitly "
         "mentioned in the article), summary (string) and diagnostic_questions (array of questions to ask of the "
         "supplier knowledge graph, covering Tier-1 to Tier-4). Use empty arrays when nothing applies.";
}

inline ExtractionBackend model_backend(ModelConfig config) {
  if (config.endpoint.empty() || config.model.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "model backend requires an endpoint and a model name");
  }
  auto ep = split_url(config.endpoint);
  ExtractionBackend b;
  b.name = "model:" + config.model;
  b.timeout = config.timeout;
  b.max_retries = config.max_retries;
  b.initial_backoff = config.initial_backoff;
  b.limiter = std::make_shared<InFlightLimiter>(std::max(1, config.max_in_flight));
  b.invoke = [ep, config](std::string_view article, std::string_view focal) -> nlohmann::json {
    nlohmann::json body{
        {"model", config.model},
        {"temperature", 0},
        {"response_format", {{"type", "json_object"}}},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", extraction_instructions()}},
                                {{"role", "user"},
                                 {"content", "Monitored company: " + std::string(focal) + "\n\nArticle:\n" +
                                                 std::string(article)}}})}};
    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);
    auto doc = detail::post_json(ep, headers, body, config.timeout);
    try {
      const auto& content = doc.at("choices").at(0).at("message").at("content");
      if (content.is_object()) return content;
      auto parsed = nlohmann::json::parse(content.get<std::string>(), nullptr, false);
      if (parsed.is_discarded()) throw Error(ErrorCode::kSchemaInvalid, "model content is not JSON");
      return parsed;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaInvalid, std::string("/choices/0/message/content: ") + e.what());
    }
  };
  return b;
}

// ---------------------------------------------------------------------------
// Web search backend (Serper-style: POST {"q": ...}, organic[].snippet)

struct SearchConfig {
  std::string endpoint = "https://google.serper.dev/search";
  std::string api_key;
  std::chrono::milliseconds timeout{20'000};
  double rate_limit_per_minute = 60.0;
  std::size_t max_results = 3;

  // TIERWATCH_SEARCH_API_KEY, optional TIERWATCH_SEARCH_ENDPOINT.
  static SearchConfig from_env() {
    SearchConfig c;
    auto key = env("TIERWATCH_SEARCH_API_KEY");
    if (!key) throw Error(ErrorCode::kInvalidConfig, "search backend needs TIERWATCH_SEARCH_API_KEY");
    c.api_key = *key;
    if (auto ep = env("TIERWATCH_SEARCH_ENDPOINT")) c.endpoint = *ep;
    return c;
  }
};

inline SearchBackend http_search_backend(SearchConfig config) {
  auto ep = split_url(config.endpoint);
  SearchBackend b;
  b.name = "search";
  b.rate_limit_per_minute = config.rate_limit_per_minute;
  b.limiter = std::make_shared<RateLimiter>(config.rate_limit_per_minute);
  b.query = [ep, config](std::string_view supplier, std::string_view customer) {
    nlohmann::json body{{"q", "products " + std::string(supplier) + " supplies to " + std::string(customer)}};
    httplib::Headers headers{{"X-API-KEY", config.api_key}};
    auto doc = detail::post_json(ep, headers, body, config.timeout);
    std::vector<std::string> out;
    if (doc.contains("organic") && doc["organic"].is_array()) {
      for (const auto& hit : doc["organic"]) {
        if (out.size() >= config.max_results) break;
        if (hit.is_object() && hit.contains("snippet") && hit["snippet"].is_string()) {
          out.push_back(hit["snippet"].get<std::string>());
        }
      }
    }
    return out;
  };
  return b;
}

}  // namespace tierwatch
