#pragma once

// Product annotation of supplier -> customer links on disrupted paths.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tierwatch/error.hpp"
#include "tierwatch/supply_graph.hpp"
#include "tierwatch/text.hpp"

namespace tierwatch {

inline constexpr std::string_view kUnknownProduct = "unknown";

struct ProductCatalog {
  std::map<std::pair<std::string, std::string>, std::string> entries;  // (supplier, customer) -> product
  std::map<std::string, std::string> fallback;                         // supplier -> default product

  bool empty() const noexcept { return entries.empty() && fallback.empty(); }
};

// Rows `{supplier, customer?, product}`; a row without customer is a
// supplier-level fallback. With a graph, ids are checked against it.
inline ProductCatalog catalog_from_json(const nlohmann::json& doc, const SupplyGraph* graph = nullptr) {
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedDocument, "product catalog must be an array");
  ProductCatalog cat;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string where = "catalog[" + std::to_string(i) + "]";
    auto supplier = detail::require_string(doc[i], "supplier", where);
    auto product = text::trim(detail::require_string(doc[i], "product", where));
    if (product.empty()) throw Error(ErrorCode::kMalformedDocument, where + ": product must be non-empty");
    std::optional<std::string> customer;
    if (doc[i].contains("customer") && !doc[i]["customer"].is_null()) {
      customer = detail::require_string(doc[i], "customer", where);
    }
    if (graph) {
      if (!graph->contains(supplier)) throw Error(ErrorCode::kUnknownEntity, where + ": unknown supplier '" + supplier + "'");
      if (customer && !graph->contains(*customer)) {
        throw Error(ErrorCode::kUnknownEntity, where + ": unknown customer '" + *customer + "'");
      }
    }
    if (customer) cat.entries[{supplier, *customer}] = product;
    else cat.fallback[supplier] = product;
  }
  return cat;
}

// Client-side throttle: at most `per_minute` calls, evenly spaced.
class RateLimiter {
 public:
  explicit RateLimiter(double per_minute) : interval_(per_minute > 0 ? 60.0 / per_minute : 0.0) {}

  void wait() {
    std::unique_lock lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    if (next_ > now) {
      auto until = next_;
      next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(interval_));
      lock.unlock();
      std::this_thread::sleep_until(until);
      return;
    }
    next_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(interval_));
  }

 private:
  std::mutex mutex_;
  double interval_;
  std::chrono::steady_clock::time_point next_{};
};

// Web-search style product lookup. Results are unverified hints.
struct SearchBackend {
  using Query = std::function<std::vector<std::string>(std::string_view supplier_name, std::string_view customer_name)>;

  std::string name;
  Query query;
  double rate_limit_per_minute = 60.0;
  std::shared_ptr<RateLimiter> limiter;
};

inline std::string replay_key(std::string_view supplier_name, std::string_view customer_name) {
  return std::string(supplier_name) + "|" + std::string(customer_name);
}

// Serves answers recorded earlier; unrecorded queries return no candidates.
inline SearchBackend replay_search_backend(nlohmann::json recording) {
  if (!recording.is_object()) throw Error(ErrorCode::kMalformedDocument, "search recording must be an object");
  auto shared = std::make_shared<const nlohmann::json>(std::move(recording));
  SearchBackend b;
  b.name = "replay";
  b.rate_limit_per_minute = 0;
  b.query = [shared](std::string_view s, std::string_view c) {
    std::vector<std::string> out;
    auto it = shared->find(replay_key(s, c));
    if (it == shared->end() || !it->is_array()) return out;
    for (const auto& v : *it) {
      if (v.is_string()) out.push_back(v.get<std::string>());
    }
    return out;
  };
  return b;
}

// Wraps a live backend and writes every answer into `recording`.
inline SearchBackend recording_search_backend(SearchBackend inner, std::shared_ptr<nlohmann::json> recording) {
  auto mutex = std::make_shared<std::mutex>();
  SearchBackend b = inner;
  b.name = inner.name + "+record";
  b.query = [inner = std::move(inner), recording, mutex](std::string_view s, std::string_view c) {
    auto result = inner.query(s, c);
    std::lock_guard lock(*mutex);
    (*recording)[replay_key(s, c)] = result;
    return result;
  };
  return b;
}

struct EnrichmentWarning {
  std::string supplier;
  std::string customer;
  std::string message;
};

struct EnrichmentResult {
  std::vector<DisruptedPath> paths;
  std::vector<EnrichmentWarning> warnings;
};

// Precedence per edge: exact catalog entry, supplier fallback, backend hint,
// then "unknown". Existing annotations are recomputed, never merged.
inline EnrichmentResult enrich_paths(const std::vector<DisruptedPath>& paths, const ProductCatalog& catalog,
                                     const SearchBackend* backend = nullptr, const SupplyGraph* graph = nullptr) {
  EnrichmentResult result;
  result.paths = paths;
  std::map<std::pair<std::string, std::string>, std::string> backend_cache;

  auto display_name = [&](const std::string& id) {
    if (graph) {
      if (auto idx = graph->find(id)) return graph->company(*idx).name;
    }
    return id;
  };

  auto product_for = [&](const std::string& supplier, const std::string& customer) -> std::string {
    if (auto it = catalog.entries.find({supplier, customer}); it != catalog.entries.end()) return it->second;
    if (auto it = catalog.fallback.find(supplier); it != catalog.fallback.end()) return it->second;
    if (backend && backend->query) {
      auto key = std::make_pair(supplier, customer);
      if (auto it = backend_cache.find(key); it != backend_cache.end()) return it->second;
      std::string product(kUnknownProduct);
      try {
        if (backend->limiter) backend->limiter->wait();
        auto hints = backend->query(display_name(supplier), display_name(customer));
        for (const auto& h : hints) {
          auto t = text::trim(h);
          if (!t.empty()) {
            product = t;
            break;
          }
        }
      } catch (const std::exception& e) {
        result.warnings.push_back({supplier, customer, std::string("search backend failed: ") + e.what()});
      }
      backend_cache.emplace(key, product);
      return product;
    }
    return std::string(kUnknownProduct);
  };

  for (auto& p : result.paths) {
    p.products.clear();
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      p.products.push_back(product_for(p.nodes[i + 1].id, p.nodes[i].id));
    }
  }
  return result;
}

}  // namespace tierwatch
