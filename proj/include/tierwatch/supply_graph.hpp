#pragma once

// Immutable multi-tier supplier network plus the deterministic query layer:
// entity resolution, tier annotation, disrupted-path traversal, centrality.
//
// Edges are stored supplier -> customer. "Upstream" traversal from a firm
// walks the reversed edges, i.e. from a customer to its suppliers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tierwatch/error.hpp"
#include "tierwatch/text.hpp"

namespace tierwatch {

struct CompanyRecord {
  std::string id;
  std::string name;
  std::string country;
  std::string industry;

  bool operator==(const CompanyRecord&) const = default;
};

struct SupplyEdge {
  std::string supplier;
  std::string customer;

  auto operator<=>(const SupplyEdge&) const = default;
};

class SupplyGraph {
 public:
  using Index = std::size_t;

  SupplyGraph() = default;

  // Validates referential integrity, rejects duplicate ids, self-loops and
  // empty attributes, and collapses duplicate edges.
  static SupplyGraph build(std::vector<CompanyRecord> companies, std::vector<SupplyEdge> edges,
                           std::optional<std::string> focal = std::nullopt) {
    SupplyGraph g;
    for (std::size_t i = 0; i < companies.size(); ++i) {
      auto& c = companies[i];
      if (c.id.empty()) {
        throw Error(ErrorCode::kMalformedDocument, "company #" + std::to_string(i) + " has an empty id");
      }
      if (text::trim(c.country).empty() || text::trim(c.industry).empty()) {
        throw Error(ErrorCode::kMalformedDocument,
                    "company '" + c.id + "' must have a non-empty country and industry");
      }
      if (c.name.empty()) c.name = c.id;
    }
    std::sort(companies.begin(), companies.end(),
              [](const CompanyRecord& a, const CompanyRecord& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < companies.size(); ++i) {
      if (companies[i].id == companies[i - 1].id) {
        throw Error(ErrorCode::kDuplicateId, "duplicate company id '" + companies[i].id + "'");
      }
    }
    g.companies_ = std::move(companies);
    for (Index i = 0; i < g.companies_.size(); ++i) g.index_.emplace(g.companies_[i].id, i);

    for (const auto& e : edges) {
      for (const auto* end : {&e.supplier, &e.customer}) {
        if (!g.index_.count(*end)) {
          throw Error(ErrorCode::kDanglingEndpoint,
                      "edge " + e.supplier + " -> " + e.customer + " references unknown company '" + *end + "'");
        }
      }
      if (e.supplier == e.customer) {
        throw Error(ErrorCode::kMalformedDocument, "self-loop on company '" + e.supplier + "'");
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges_ = std::move(edges);

    const auto n = g.companies_.size();
    g.suppliers_.assign(n, {});
    g.customers_.assign(n, {});
    for (const auto& e : g.edges_) {
      auto s = g.index_.at(e.supplier);
      auto c = g.index_.at(e.customer);
      g.suppliers_[c].push_back(s);
      g.customers_[s].push_back(c);
    }
    for (auto& v : g.suppliers_) std::sort(v.begin(), v.end());
    for (auto& v : g.customers_) std::sort(v.begin(), v.end());

    g.name_tokens_.reserve(n);
    g.name_keys_.reserve(n);
    g.id_keys_.reserve(n);
    for (const auto& c : g.companies_) {
      g.name_tokens_.push_back(text::company_tokens(c.name));
      g.name_keys_.push_back(text::join(g.name_tokens_.back(), " "));
      g.id_keys_.push_back(text::normalize_company(c.id));
    }

    if (focal) {
      if (!g.index_.count(*focal)) {
        throw Error(ErrorCode::kUnknownEntity, "focal company '" + *focal + "' is not in the graph");
      }
      g.focal_ = std::move(focal);
    }
    return g;
  }

  std::size_t size() const noexcept { return companies_.size(); }
  bool empty() const noexcept { return companies_.empty(); }

  // Sorted by id; a company's position is its Index.
  const std::vector<CompanyRecord>& companies() const noexcept { return companies_; }
  const std::vector<SupplyEdge>& edges() const noexcept { return edges_; }
  const std::optional<std::string>& focal() const noexcept { return focal_; }

  std::optional<Index> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Index index_of(std::string_view id) const {
    auto idx = find(id);
    if (!idx) throw Error(ErrorCode::kUnknownEntity, "unknown company id '" + std::string(id) + "'");
    return *idx;
  }

  bool contains(std::string_view id) const { return find(id).has_value(); }

  const CompanyRecord& company(Index i) const { return companies_.at(i); }
  const CompanyRecord& company(std::string_view id) const { return companies_[index_of(id)]; }

  std::span<const Index> suppliers_of(Index i) const { return suppliers_.at(i); }
  std::span<const Index> customers_of(Index i) const { return customers_.at(i); }

  const std::vector<std::string>& name_tokens(Index i) const { return name_tokens_.at(i); }
  const std::string& name_key(Index i) const { return name_keys_.at(i); }
  const std::string& id_key(Index i) const { return id_keys_.at(i); }

  bool operator==(const SupplyGraph& other) const {
    return companies_ == other.companies_ && edges_ == other.edges_ && focal_ == other.focal_;
  }

 private:
  std::vector<CompanyRecord> companies_;
  std::vector<SupplyEdge> edges_;
  std::optional<std::string> focal_;
  std::unordered_map<std::string, Index> index_;
  std::vector<std::vector<Index>> suppliers_;
  std::vector<std::vector<Index>> customers_;
  std::vector<std::vector<std::string>> name_tokens_;
  std::vector<std::string> name_keys_;
  std::vector<std::string> id_keys_;
};

// ---------------------------------------------------------------------------
// Graph document I/O

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kMalformedDocument, where + ": missing field '" + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) throw Error(ErrorCode::kMalformedDocument, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline SupplyGraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedDocument, "graph document must be an object");
  if (!doc.contains("companies") || !doc["companies"].is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "graph document requires a 'companies' array");
  }
  if (doc.contains("edges") && !doc["edges"].is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "'edges' must be an array");
  }
  std::vector<CompanyRecord> companies;
  const auto& cs = doc["companies"];
  for (std::size_t i = 0; i < cs.size(); ++i) {
    std::string where = "companies[" + std::to_string(i) + "]";
    CompanyRecord c;
    c.id = detail::require_string(cs[i], "id", where);
    where += " (" + c.id + ")";
    c.name = cs[i].contains("name") ? detail::require_string(cs[i], "name", where) : c.id;
    c.country = detail::require_string(cs[i], "country", where);
    c.industry = detail::require_string(cs[i], "industry", where);
    companies.push_back(std::move(c));
  }
  std::vector<SupplyEdge> edges;
  if (doc.contains("edges")) {
    const auto& es = doc["edges"];
    for (std::size_t i = 0; i < es.size(); ++i) {
      std::string where = "edges[" + std::to_string(i) + "]";
      edges.push_back({detail::require_string(es[i], "supplier", where),
                       detail::require_string(es[i], "customer", where)});
    }
  }
  std::optional<std::string> focal;
  if (doc.contains("focal") && !doc["focal"].is_null()) {
    focal = detail::require_string(doc, "focal", "graph document");
  }
  return SupplyGraph::build(std::move(companies), std::move(edges), std::move(focal));
}

inline SupplyGraph load_graph(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("graph document does not parse: ") + e.what());
  }
  return graph_from_json(doc);
}

inline SupplyGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open graph file '" + path + "'");
  return load_graph(in);
}

inline nlohmann::json to_json(const SupplyGraph& g) {
  nlohmann::json doc;
  if (g.focal()) doc["focal"] = *g.focal();
  auto& cs = doc["companies"] = nlohmann::json::array();
  for (const auto& c : g.companies()) {
    cs.push_back({{"id", c.id}, {"name", c.name}, {"country", c.country}, {"industry", c.industry}});
  }
  auto& es = doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) es.push_back({{"supplier", e.supplier}, {"customer", e.customer}});
  return doc;
}

// ---------------------------------------------------------------------------
// Entity resolution

struct ResolutionCandidate {
  std::string id;
  std::string name;
  double similarity = 0.0;
};

struct Resolution {
  std::optional<std::string> id;  // set on a match
  bool exact = false;
  double similarity = 0.0;
  std::vector<ResolutionCandidate> candidates;  // top-3 on no-match

  bool matched() const noexcept { return id.has_value(); }
};

inline constexpr double kResolutionThreshold = 0.8;

inline Resolution resolve_entity(std::string_view free_text, const SupplyGraph& graph) {
  if (text::trim(free_text).empty()) throw Error(ErrorCode::kEmptyInput, "entity text is empty");
  const auto query_tokens = text::company_tokens(free_text);
  const auto key = text::join(query_tokens, " ");

  Resolution r;
  // Companies are id-ordered, so the first hit is the lexicographically smallest.
  for (SupplyGraph::Index i = 0; i < graph.size(); ++i) {
    if (!key.empty() && (graph.name_key(i) == key || graph.id_key(i) == key)) {
      r.id = graph.company(i).id;
      r.exact = true;
      r.similarity = 1.0;
      return r;
    }
  }

  std::vector<ResolutionCandidate> scored;
  for (SupplyGraph::Index i = 0; i < graph.size(); ++i) {
    double sim = text::token_set_jaccard(query_tokens, graph.name_tokens(i));
    if (sim > 0.0) scored.push_back({graph.company(i).id, graph.company(i).name, sim});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  });
  if (!scored.empty() && scored.front().similarity >= kResolutionThreshold) {
    r.id = scored.front().id;
    r.similarity = scored.front().similarity;
    return r;
  }
  if (scored.size() > 3) scored.resize(3);
  r.candidates = std::move(scored);
  return r;
}

// ---------------------------------------------------------------------------
// Tier annotation and traversal

struct TierMap {
  std::string focal;
  std::map<std::string, int> tiers;

  std::optional<int> tier_of(std::string_view id) const {
    auto it = tiers.find(std::string(id));
    if (it == tiers.end()) return std::nullopt;
    return it->second;
  }
  bool operator==(const TierMap&) const = default;
};

namespace detail {

inline constexpr int kUnreached = -1;

// Breadth-first depths over reversed supply edges; nodes beyond `limit`
// (when non-negative) are left unreached.
inline std::vector<int> upstream_depths(const SupplyGraph& g, SupplyGraph::Index start, int limit = -1) {
  std::vector<int> depth(g.size(), kUnreached);
  std::deque<SupplyGraph::Index> queue{start};
  depth[start] = 0;
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (limit >= 0 && depth[cur] >= limit) continue;
    for (auto s : g.suppliers_of(cur)) {
      if (depth[s] != kUnreached) continue;
      depth[s] = depth[cur] + 1;
      queue.push_back(s);
    }
  }
  return depth;
}

}  // namespace detail

inline TierMap annotate_tiers(const SupplyGraph& graph, std::string_view focal) {
  auto f = graph.find(focal);
  if (!f) throw Error(ErrorCode::kUnknownEntity, "unknown focal company '" + std::string(focal) + "'");
  auto depth = detail::upstream_depths(graph, *f);
  TierMap tm;
  tm.focal = std::string(focal);
  for (SupplyGraph::Index i = 0; i < graph.size(); ++i) {
    if (depth[i] != detail::kUnreached) tm.tiers.emplace(graph.company(i).id, depth[i]);
  }
  return tm;
}

// Every node reachable upstream from `supplier`, keyed by minimal depth
// relative to it. The supplier itself is excluded.
inline std::map<std::string, int> downstream_set(const SupplyGraph& graph, std::string_view supplier) {
  auto s = graph.find(supplier);
  if (!s) throw Error(ErrorCode::kUnknownEntity, "unknown supplier '" + std::string(supplier) + "'");
  auto depth = detail::upstream_depths(graph, *s);
  std::map<std::string, int> out;
  for (SupplyGraph::Index i = 0; i < graph.size(); ++i) {
    if (i != *s && depth[i] > 0) out.emplace(graph.company(i).id, depth[i]);
  }
  return out;
}

struct DisruptionCriteria {
  std::set<std::string> countries;
  std::set<std::string> industries;
  std::set<std::string> companies;  // free-text names, resolved against the graph

  bool empty() const noexcept { return countries.empty() && industries.empty() && companies.empty(); }
};

// Criteria compiled against one graph: a per-node match flag.
class CriteriaMatcher {
 public:
  CriteriaMatcher(const SupplyGraph& graph, const DisruptionCriteria& criteria) : matched_(graph.size(), false) {
    std::set<std::string> countries, industries;
    for (const auto& c : criteria.countries) countries.insert(text::normalize_key(c));
    for (const auto& c : criteria.industries) industries.insert(text::normalize_key(c));
    std::set<SupplyGraph::Index> companies;
    for (const auto& name : criteria.companies) {
      if (text::trim(name).empty()) continue;
      auto r = resolve_entity(name, graph);
      if (r.id) companies.insert(graph.index_of(*r.id));
    }
    for (SupplyGraph::Index i = 0; i < graph.size(); ++i) {
      const auto& c = graph.company(i);
      matched_[i] = countries.count(text::normalize_key(c.country)) > 0 ||
                    industries.count(text::normalize_key(c.industry)) > 0 || companies.count(i) > 0;
    }
  }

  bool matches(SupplyGraph::Index i) const { return matched_.at(i); }

 private:
  std::vector<bool> matched_;
};

struct PathNode {
  std::string id;
  std::string country;
  std::string industry;

  bool operator==(const PathNode&) const = default;
};

struct DisruptedPath {
  std::vector<PathNode> nodes;   // nodes[0] is the root (focal firm), outward
  int disrupted_tier = 0;        // == nodes.size() - 1
  std::vector<std::string> products;  // products[i] flows nodes[i+1] -> nodes[i]; empty until enriched

  bool operator==(const DisruptedPath&) const = default;

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(n.id);
    return out;
  }
};

inline bool path_order(const DisruptedPath& a, const DisruptedPath& b) {
  if (a.disrupted_tier != b.disrupted_tier) return a.disrupted_tier < b.disrupted_tier;
  return a.ids() < b.ids();
}

namespace detail {

inline PathNode path_node(const SupplyGraph& g, SupplyGraph::Index i) {
  const auto& c = g.company(i);
  return {c.id, c.country, c.industry};
}

// All minimal-depth routes from `root` to every matching node within
// `max_depth`. With include_root, a matching root yields a single-node path.
inline std::vector<DisruptedPath> minimal_paths(const SupplyGraph& g, SupplyGraph::Index root,
                                                const CriteriaMatcher& matcher, int max_depth, bool include_root) {
  auto depth = upstream_depths(g, root, max_depth);
  std::vector<DisruptedPath> out;
  std::vector<SupplyGraph::Index> stack;

  // Walk back toward the root along customers exactly one tier shallower.
  std::function<void(SupplyGraph::Index)> back = [&](SupplyGraph::Index cur) {
    stack.push_back(cur);
    if (cur == root) {
      DisruptedPath p;
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) p.nodes.push_back(path_node(g, *it));
      p.disrupted_tier = static_cast<int>(p.nodes.size()) - 1;
      out.push_back(std::move(p));
    } else {
      for (auto c : g.customers_of(cur)) {
        if (depth[c] != kUnreached && depth[c] == depth[cur] - 1) back(c);
      }
    }
    stack.pop_back();
  };

  for (SupplyGraph::Index i = 0; i < g.size(); ++i) {
    if (depth[i] == kUnreached || !matcher.matches(i)) continue;
    if (i == root && !include_root) continue;
    back(i);
  }
  std::sort(out.begin(), out.end(), path_order);
  return out;
}

}  // namespace detail

inline std::vector<DisruptedPath> disrupted_paths(const SupplyGraph& graph, std::string_view focal,
                                                  const DisruptionCriteria& criteria, int max_tier = 4) {
  auto f = graph.find(focal);
  if (!f) throw Error(ErrorCode::kUnknownEntity, "unknown focal company '" + std::string(focal) + "'");
  if (max_tier < 1) throw Error(ErrorCode::kInvalidInput, "max_tier must be >= 1");
  CriteriaMatcher matcher(graph, criteria);
  return detail::minimal_paths(graph, *f, matcher, max_tier, /*include_root=*/false);
}

// ---------------------------------------------------------------------------
// Centrality

struct CentralityEntry {
  double degree = 0.0;         // undirected degree / (n - 1)
  double pagerank = 0.0;       // max-normalized to [0, 1]
  double pagerank_raw = 0.0;   // sums to 1 over the graph
};

struct CentralityTable {
  std::map<std::string, CentralityEntry> entries;
  int iterations = 0;

  const CentralityEntry& at(std::string_view id) const {
    auto it = entries.find(std::string(id));
    if (it == entries.end()) throw Error(ErrorCode::kUnknownEntity, "no centrality for '" + std::string(id) + "'");
    return it->second;
  }
};

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-8;  // L1 change between iterations
  int max_iterations = 100;
};

// Degree on the undirected view, PageRank on supplier -> customer links with
// dangling mass spread uniformly.
inline CentralityTable centrality(const SupplyGraph& graph, const PageRankOptions& opts = {}) {
  if (graph.empty()) throw Error(ErrorCode::kEmptyGraph, "centrality requires a non-empty graph");
  const auto n = graph.size();
  const double nd = static_cast<double>(n);

  std::vector<double> rank(n, 1.0 / nd), next(n);
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    double dangling = 0.0;
    for (SupplyGraph::Index i = 0; i < n; ++i) {
      if (graph.customers_of(i).empty()) dangling += rank[i];
    }
    const double base = (1.0 - opts.damping) / nd + opts.damping * dangling / nd;
    std::fill(next.begin(), next.end(), base);
    for (SupplyGraph::Index i = 0; i < n; ++i) {
      auto out = graph.customers_of(i);
      if (out.empty()) continue;
      const double share = opts.damping * rank[i] / static_cast<double>(out.size());
      for (auto c : out) next[c] += share;
    }
    double delta = 0.0;
    for (SupplyGraph::Index i = 0; i < n; ++i) delta += std::abs(next[i] - rank[i]);
    rank.swap(next);
    if (delta < opts.tolerance) {
      ++iter;
      break;
    }
  }

  const double max_rank = *std::max_element(rank.begin(), rank.end());
  CentralityTable table;
  table.iterations = iter;
  for (SupplyGraph::Index i = 0; i < n; ++i) {
    std::set<SupplyGraph::Index> neighbours(graph.suppliers_of(i).begin(), graph.suppliers_of(i).end());
    neighbours.insert(graph.customers_of(i).begin(), graph.customers_of(i).end());
    CentralityEntry e;
    e.degree = n > 1 ? static_cast<double>(neighbours.size()) / (nd - 1.0) : 0.0;
    e.pagerank_raw = rank[i];
    e.pagerank = max_rank > 0.0 ? rank[i] / max_rank : 0.0;
    table.entries.emplace(graph.company(i).id, e);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Path JSON

inline nlohmann::json to_json(const DisruptedPath& p) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : p.nodes) nodes.push_back({{"company", n.id}, {"country", n.country}, {"industry", n.industry}});
  nlohmann::json doc{{"tier", p.disrupted_tier}, {"nodes", std::move(nodes)}};
  if (!p.products.empty()) doc["products"] = p.products;
  return doc;
}

inline DisruptedPath path_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "path requires a 'nodes' array");
  }
  DisruptedPath p;
  for (const auto& n : doc["nodes"]) {
    p.nodes.push_back({detail::require_string(n, "company", "path node"), detail::require_string(n, "country", "path node"),
                       detail::require_string(n, "industry", "path node")});
  }
  p.disrupted_tier = static_cast<int>(p.nodes.size()) - 1;
  if (doc.contains("tier")) {
    if (!doc["tier"].is_number_integer()) throw Error(ErrorCode::kMalformedDocument, "path 'tier' must be an integer");
    p.disrupted_tier = doc["tier"].get<int>();
  }
  if (doc.contains("products")) {
    if (!doc["products"].is_array()) throw Error(ErrorCode::kMalformedDocument, "path 'products' must be an array");
    for (const auto& s : doc["products"]) {
      if (!s.is_string()) throw Error(ErrorCode::kMalformedDocument, "path products must be strings");
      p.products.push_back(s.get<std::string>());
    }
  }
  return p;
}

inline nlohmann::json to_json(const std::vector<DisruptedPath>& paths) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : paths) out.push_back(to_json(p));
  return out;
}

inline std::vector<DisruptedPath> paths_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedDocument, "paths must be an array");
  std::vector<DisruptedPath> out;
  for (const auto& p : doc) out.push_back(path_from_json(p));
  return out;
}

}  // namespace tierwatch
