#pragma once

// Threshold-driven action plans and the human review gate.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tierwatch/error.hpp"
#include "tierwatch/extraction.hpp"
#include "tierwatch/risk_engine.hpp"

namespace tierwatch {

enum class Action { kReplace, kIncreaseMonitoring, kStandardOperations };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::kReplace: return "Replace";
    case Action::kIncreaseMonitoring: return "IncreaseMonitoring";
    case Action::kStandardOperations: return "StandardOperations";
  }
  return "StandardOperations";
}

inline std::optional<Action> parse_action(std::string_view s) {
  if (s == "Replace") return Action::kReplace;
  if (s == "IncreaseMonitoring") return Action::kIncreaseMonitoring;
  if (s == "StandardOperations") return Action::kStandardOperations;
  return std::nullopt;
}

constexpr Action action_for(RiskLevel level) {
  switch (level) {
    case RiskLevel::kHigh: return Action::kReplace;
    case RiskLevel::kMedium: return Action::kIncreaseMonitoring;
    case RiskLevel::kLow: return Action::kStandardOperations;
  }
  return Action::kStandardOperations;
}

enum class ReviewState { kPendingReview, kApproved, kRevised, kOverridden };

inline std::string_view to_string(ReviewState s) {
  switch (s) {
    case ReviewState::kPendingReview: return "PendingReview";
    case ReviewState::kApproved: return "Approved";
    case ReviewState::kRevised: return "Revised";
    case ReviewState::kOverridden: return "Overridden";
  }
  return "PendingReview";
}

inline std::optional<ReviewState> parse_review_state(std::string_view s) {
  if (s == "PendingReview") return ReviewState::kPendingReview;
  if (s == "Approved") return ReviewState::kApproved;
  if (s == "Revised") return ReviewState::kRevised;
  if (s == "Overridden") return ReviewState::kOverridden;
  return std::nullopt;
}

struct ActionItem {
  std::string supplier;
  std::string supplier_name;
  Action action = Action::kStandardOperations;
  std::string justification;
  std::optional<std::string> due;  // ISO date
  double score = 0.0;
  RiskLevel level = RiskLevel::kLow;

  bool operator==(const ActionItem&) const = default;
};

struct AuditEntry {
  std::string timestamp;
  std::string reviewer;
  std::string verdict;  // approve | revise | override
  ReviewState from = ReviewState::kPendingReview;
  ReviewState to = ReviewState::kPendingReview;
  std::string detail;

  bool operator==(const AuditEntry&) const = default;
};

struct ActionPlan {
  std::vector<ActionItem> items;
  std::string disruption_summary;
  std::string network_impact_analysis;
  std::string replacement_recommendations;
  ReviewState review_state = ReviewState::kPendingReview;
  int revision = 0;
  std::vector<AuditEntry> audit;

  bool has_replace() const {
    for (const auto& i : items) {
      if (i.action == Action::kReplace) return true;
    }
    return false;
  }

  bool operator==(const ActionPlan&) const = default;
};

struct Narrative {
  std::string disruption_summary;
  std::string network_impact_analysis;
  std::string replacement_recommendations;
};

using NarrativeBackend = std::function<Narrative(const RiskAssessment&, const DisruptionReport&)>;

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string justify(const SupplierRisk& r, Action a) {
  const auto& c = r.components;
  std::string why = "Risk score " + fixed(r.score, 3) + " (" + std::string(to_string(r.level)) +
                    "): breadth " + fixed(c.exposure_breadth, 3) + ", dependency " + fixed(c.dependency_ratio, 3) +
                    ", criticality " + fixed(c.downstream_criticality, 3) + ", centrality " +
                    fixed(c.supplier_centrality, 3) + ", depth " + fixed(c.exposure_depth, 3) + ".";
  switch (a) {
    case Action::kReplace: return why + " Source an alternative supplier.";
    case Action::kIncreaseMonitoring: return why + " Increase monitoring of this supplier.";
    case Action::kStandardOperations: return why + " Maintain standard operations.";
  }
  return why;
}

inline std::string list_names(const std::vector<std::string>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += (i + 1 == v.size()) ? " and " : ", ";
    out += v[i];
  }
  return out;
}

inline Narrative template_narrative(const RiskAssessment& a, const DisruptionReport& report) {
  Narrative n;
  n.disruption_summary = std::string(to_string(report.disruption_type)) + " disruption. " +
                         (report.summary.empty() ? std::string() : report.summary + " ") +
                         "Affected countries: " + list_names(report.countries) +
                         "; industries: " + list_names(report.industries) +
                         "; companies: " + list_names(report.companies) + ".";
  if (a.suppliers.empty()) {
    n.network_impact_analysis = "No Tier-1 supplier is exposed to the disruption.";
    n.replacement_recommendations = "No supplier replacement is required.";
    return n;
  }
  std::size_t high = 0, medium = 0, low = 0;
  for (const auto& s : a.suppliers) {
    (s.level == RiskLevel::kHigh ? high : s.level == RiskLevel::kMedium ? medium : low)++;
  }
  const auto& top = a.suppliers.front();
  n.network_impact_analysis = std::to_string(a.suppliers.size()) + " exposed Tier-1 supplier(s): " +
                              std::to_string(high) + " HIGH, " + std::to_string(medium) + " MEDIUM, " +
                              std::to_string(low) + " LOW. Highest risk: " + top.name + " (score " +
                              fixed(top.score, 3) + ", exposure depth " +
                              fixed(top.components.exposure_depth, 2) + ").";
  std::vector<std::string> replace;
  for (const auto& s : a.suppliers) {
    if (s.level == RiskLevel::kHigh) replace.push_back(s.name);
  }
  n.replacement_recommendations = replace.empty()
                                      ? std::string("No supplier reaches the replacement threshold.")
                                      : "Replace " + list_names(replace) + " and validate alternatives against the disruption.";
  return n;
}

}  // namespace detail

inline ActionPlan decide(const RiskAssessment& assessment, const DisruptionReport& report,
                         const NarrativeBackend& narrative = {}) {
  ActionPlan plan;
  std::set<std::string> seen;
  for (const auto& r : assessment.suppliers) {
    if (!seen.insert(r.supplier).second) {
      throw Error(ErrorCode::kInvalidInput, "assessment lists supplier '" + r.supplier + "' twice");
    }
    auto action = action_for(r.level);
    plan.items.push_back({r.supplier, r.name, action, detail::justify(r, action), std::nullopt, r.score, r.level});
  }
  auto n = narrative ? narrative(assessment, report) : detail::template_narrative(assessment, report);
  plan.disruption_summary = std::move(n.disruption_summary);
  plan.network_impact_analysis = std::move(n.network_impact_analysis);
  plan.replacement_recommendations = std::move(n.replacement_recommendations);
  return plan;
}

// ---------------------------------------------------------------------------
// Review verdicts

struct Approve {};

struct ItemEdit {
  std::string supplier;
  std::optional<Action> action;
  std::optional<std::string> justification;
  std::optional<std::string> due;
};

struct Revise {
  std::vector<ItemEdit> edits;
};

struct Override {
  std::vector<ActionItem> items;
};

using Verdict = std::variant<Approve, Revise, Override>;

inline std::string_view verdict_name(const Verdict& v) {
  return std::visit(
      [](const auto& x) -> std::string_view {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Approve>) return "approve";
        else if constexpr (std::is_same_v<T, Revise>) return "revise";
        else return "override";
      },
      v);
}

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

// Applies one verdict to a pending plan. Approve and override are terminal;
// revise passes through Revised and re-enters PendingReview with the edits
// applied. Every accepted verdict appends one audit entry.
inline ActionPlan review(const ActionPlan& plan, const Verdict& verdict, std::string_view reviewer,
                         std::string timestamp = utc_timestamp()) {
  if (plan.review_state != ReviewState::kPendingReview) {
    throw Error(ErrorCode::kInvalidTransition, "cannot " + std::string(verdict_name(verdict)) + " a plan in state " +
                                                   std::string(to_string(plan.review_state)));
  }
  if (text::trim(reviewer).empty()) throw Error(ErrorCode::kMalformedEdits, "reviewer identity is required");

  ActionPlan next = plan;
  AuditEntry entry{std::move(timestamp), std::string(reviewer), std::string(verdict_name(verdict)),
                   ReviewState::kPendingReview, ReviewState::kPendingReview, {}};

  if (std::holds_alternative<Approve>(verdict)) {
    next.review_state = ReviewState::kApproved;
    entry.detail = std::to_string(plan.items.size()) + " item(s) approved";
  } else if (const auto* rev = std::get_if<Revise>(&verdict)) {
    if (rev->edits.empty()) throw Error(ErrorCode::kMalformedEdits, "revise verdict carries no edits");
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < next.items.size(); ++i) pos.emplace(next.items[i].supplier, i);
    std::vector<std::string> changes;
    for (const auto& e : rev->edits) {
      auto it = pos.find(e.supplier);
      if (it == pos.end()) throw Error(ErrorCode::kMalformedEdits, "edit targets unknown supplier '" + e.supplier + "'");
      if (!e.action && !e.justification && !e.due) {
        throw Error(ErrorCode::kMalformedEdits, "edit for '" + e.supplier + "' changes nothing");
      }
      auto& item = next.items[it->second];
      if (e.action) {
        changes.push_back(e.supplier + ": " + std::string(to_string(item.action)) + " -> " +
                          std::string(to_string(*e.action)));
        item.action = *e.action;
      }
      if (e.justification) item.justification = *e.justification;
      if (e.due) item.due = *e.due;
    }
    if (changes.empty()) changes.push_back("text edits");
    entry.detail = text::join(changes, "; ");
    ++next.revision;
    next.review_state = ReviewState::kPendingReview;
  } else {
    const auto& ov = std::get<Override>(verdict);
    std::set<std::string> seen;
    for (const auto& i : ov.items) {
      if (i.supplier.empty() || !seen.insert(i.supplier).second) {
        throw Error(ErrorCode::kMalformedEdits, "override items need unique, non-empty suppliers");
      }
    }
    std::vector<std::string> prior;
    for (const auto& i : plan.items) prior.push_back(i.supplier + "=" + std::string(to_string(i.action)));
    entry.detail = "prior: " + (prior.empty() ? std::string("none") : text::join(prior, ", "));
    next.items = ov.items;
    next.review_state = ReviewState::kOverridden;
  }
  entry.to = std::holds_alternative<Revise>(verdict) ? ReviewState::kRevised : next.review_state;
  next.audit.push_back(std::move(entry));
  return next;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render_plan(const ActionPlan& plan) {
  std::ostringstream os;
  os << "# Supply Chain Disruption Action Plan\n\n";
  os << "Review state: " << to_string(plan.review_state);
  if (plan.revision > 0) os << " (revision " << plan.revision << ")";
  os << "\n\n## Disruption Summary\n\n" << plan.disruption_summary << "\n\n";
  os << "## Network Impact Analysis\n\n" << plan.network_impact_analysis << "\n\n";
  os << "## Supplier Actions\n\n";
  if (plan.items.empty()) {
    os << "No exposed Tier-1 suppliers. No action required.\n\n";
  } else {
    os << "| Supplier | Score | Level | Action |\n|---|---|---|---|\n";
    for (const auto& i : plan.items) {
      os << "| " << i.supplier_name << " | " << detail::fixed(i.score, 3) << " | " << to_string(i.level) << " | "
         << to_string(i.action) << " |\n";
    }
    os << "\n";
    for (const auto& i : plan.items) {
      os << "- **" << i.supplier_name << "**: " << i.justification;
      if (i.due) os << " Due " << *i.due << ".";
      os << "\n";
    }
    os << "\n";
  }
  os << "## Replacement Recommendations\n\n" << plan.replacement_recommendations << "\n";
  if (!plan.audit.empty()) {
    os << "\n## Review Log\n\n";
    for (const auto& a : plan.audit) {
      os << "- " << a.timestamp << " " << a.reviewer << ": " << a.verdict << " (" << to_string(a.from) << " -> "
         << to_string(a.to) << ") " << a.detail << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const ActionItem& i) {
  nlohmann::json j{{"supplier", i.supplier},
                   {"supplier_name", i.supplier_name},
                   {"action", to_string(i.action)},
                   {"justification", i.justification},
                   {"score", round6(i.score)},
                   {"level", to_string(i.level)}};
  if (i.due) j["due"] = *i.due;
  return j;
}

inline ActionItem action_item_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedEdits, "action item must be an object");
  ActionItem i;
  i.supplier = detail::require_string(j, "supplier", "action item");
  i.supplier_name = j.contains("supplier_name") && j["supplier_name"].is_string() ? j["supplier_name"].get<std::string>()
                                                                                  : i.supplier;
  auto action = parse_action(detail::require_string(j, "action", i.supplier));
  if (!action) throw Error(ErrorCode::kMalformedEdits, i.supplier + ": unknown action");
  i.action = *action;
  if (j.contains("justification") && j["justification"].is_string()) i.justification = j["justification"];
  if (j.contains("due") && j["due"].is_string()) i.due = j["due"].get<std::string>();
  if (j.contains("score") && j["score"].is_number()) i.score = j["score"].get<double>();
  if (j.contains("level") && j["level"].is_string()) {
    if (auto l = parse_risk_level(j["level"].get<std::string>())) i.level = *l;
  }
  return i;
}

inline nlohmann::json to_json(const ActionPlan& p) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& i : p.items) items.push_back(to_json(i));
  nlohmann::json audit = nlohmann::json::array();
  for (const auto& a : p.audit) {
    audit.push_back({{"timestamp", a.timestamp},
                     {"reviewer", a.reviewer},
                     {"verdict", a.verdict},
                     {"from", to_string(a.from)},
                     {"to", to_string(a.to)},
                     {"detail", a.detail}});
  }
  return {{"items", std::move(items)},
          {"disruption_summary", p.disruption_summary},
          {"network_impact_analysis", p.network_impact_analysis},
          {"replacement_recommendations", p.replacement_recommendations},
          {"review_state", to_string(p.review_state)},
          {"revision", p.revision},
          {"audit", std::move(audit)}};
}

inline ActionPlan plan_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "plan requires an 'items' array");
  }
  ActionPlan p;
  for (const auto& i : j["items"]) p.items.push_back(action_item_from_json(i));
  p.disruption_summary = detail::require_string(j, "disruption_summary", "plan");
  p.network_impact_analysis = detail::require_string(j, "network_impact_analysis", "plan");
  p.replacement_recommendations = detail::require_string(j, "replacement_recommendations", "plan");
  auto state = parse_review_state(detail::require_string(j, "review_state", "plan"));
  if (!state) throw Error(ErrorCode::kMalformedDocument, "plan: unknown review_state");
  p.review_state = *state;
  if (j.contains("revision") && j["revision"].is_number_integer()) p.revision = j["revision"].get<int>();
  if (j.contains("audit") && j["audit"].is_array()) {
    for (const auto& a : j["audit"]) {
      AuditEntry e;
      e.timestamp = detail::require_string(a, "timestamp", "audit entry");
      e.reviewer = detail::require_string(a, "reviewer", "audit entry");
      e.verdict = detail::require_string(a, "verdict", "audit entry");
      auto from = parse_review_state(detail::require_string(a, "from", "audit entry"));
      auto to = parse_review_state(detail::require_string(a, "to", "audit entry"));
      if (!from || !to) throw Error(ErrorCode::kMalformedDocument, "audit entry: unknown state");
      e.from = *from;
      e.to = *to;
      if (a.contains("detail") && a["detail"].is_string()) e.detail = a["detail"];
      p.audit.push_back(std::move(e));
    }
  }
  return p;
}

// Verdict bodies: {"verdict": "approve"} | {"verdict": "revise", "edits": [...]}
// | {"verdict": "override", "items": [...]}.
inline Verdict verdict_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("verdict") || !j["verdict"].is_string()) {
    throw Error(ErrorCode::kMalformedEdits, "verdict body requires a 'verdict' string");
  }
  auto kind = j["verdict"].get<std::string>();
  if (kind == "approve") return Approve{};
  if (kind == "revise") {
    if (!j.contains("edits") || !j["edits"].is_array()) throw Error(ErrorCode::kMalformedEdits, "revise requires 'edits'");
    Revise r;
    for (const auto& e : j["edits"]) {
      if (!e.is_object() || !e.contains("supplier") || !e["supplier"].is_string()) {
        throw Error(ErrorCode::kMalformedEdits, "each edit needs a 'supplier'");
      }
      ItemEdit edit;
      edit.supplier = e["supplier"].get<std::string>();
      if (e.contains("action")) {
        auto a = e["action"].is_string() ? parse_action(e["action"].get<std::string>()) : std::nullopt;
        if (!a) throw Error(ErrorCode::kMalformedEdits, "edit for '" + edit.supplier + "' has an unknown action");
        edit.action = a;
      }
      if (e.contains("justification")) {
        if (!e["justification"].is_string()) throw Error(ErrorCode::kMalformedEdits, "justification must be a string");
        edit.justification = e["justification"].get<std::string>();
      }
      if (e.contains("due")) {
        if (!e["due"].is_string()) throw Error(ErrorCode::kMalformedEdits, "due must be a string");
        edit.due = e["due"].get<std::string>();
      }
      r.edits.push_back(std::move(edit));
    }
    return r;
  }
  if (kind == "override") {
    if (!j.contains("items") || !j["items"].is_array()) throw Error(ErrorCode::kMalformedEdits, "override requires 'items'");
    Override o;
    for (const auto& i : j["items"]) {
      try {
        o.items.push_back(action_item_from_json(i));
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedEdits, e.what());
      }
    }
    return o;
  }
  throw Error(ErrorCode::kMalformedEdits, "unknown verdict '" + kind + "'");
}

}  // namespace tierwatch
