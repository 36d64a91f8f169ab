#pragma once

// Stage 1: article text -> DisruptionReport through a pluggable backend.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <set>
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

enum class DisruptionType {
  kGeopolitical,
  kTradePolicy,
  kNaturalDisaster,
  kEconomicCrisis,
  kCybersecurity,
  kLabourStrike,
  kCompanyBankruptcy,
  kOther,
};

inline constexpr std::array<std::pair<DisruptionType, std::string_view>, 8> kDisruptionTypeNames{{
    {DisruptionType::kGeopolitical, "Geopolitical"},
    {DisruptionType::kTradePolicy, "TradePolicy"},
    {DisruptionType::kNaturalDisaster, "NaturalDisaster"},
    {DisruptionType::kEconomicCrisis, "EconomicCrisis"},
    {DisruptionType::kCybersecurity, "Cybersecurity"},
    {DisruptionType::kLabourStrike, "LabourStrike"},
    {DisruptionType::kCompanyBankruptcy, "CompanyBankruptcy"},
    {DisruptionType::kOther, "Other"},
}};

inline std::string_view to_string(DisruptionType t) {
  for (const auto& [value, name] : kDisruptionTypeNames) {
    if (value == t) return name;
  }
  return "Other";
}

// Accepts any casing and separator style ("natural disaster", "LABOUR_STRIKE").
inline std::optional<DisruptionType> parse_disruption_type(std::string_view s) {
  std::string squashed;
  for (char c : text::normalize_key(s)) {
    if (c != ' ') squashed.push_back(c);
  }
  if (squashed == "laborstrike") squashed = "labourstrike";
  if (squashed == "bankruptcy") squashed = "companybankruptcy";
  for (const auto& [value, name] : kDisruptionTypeNames) {
    if (text::to_lower(name) == squashed) return value;
  }
  return std::nullopt;
}

struct DisruptionReport {
  DisruptionType disruption_type = DisruptionType::kOther;
  std::vector<std::string> countries;
  std::vector<std::string> industries;
  std::vector<std::string> companies;
  std::string summary;
  std::vector<std::string> diagnostic_questions;

  // A report with no entities is a non-event downstream.
  bool is_event() const noexcept { return !countries.empty() || !industries.empty() || !companies.empty(); }

  DisruptionCriteria criteria() const {
    return {{countries.begin(), countries.end()},
            {industries.begin(), industries.end()},
            {companies.begin(), companies.end()}};
  }

  bool operator==(const DisruptionReport&) const = default;
};

inline nlohmann::json to_json(const DisruptionReport& r) {
  return {{"disruption_type", to_string(r.disruption_type)},
          {"countries", r.countries},
          {"industries", r.industries},
          {"companies", r.companies},
          {"summary", r.summary},
          {"diagnostic_questions", r.diagnostic_questions}};
}

// Trims, drops blanks and keeps the first spelling of each normalized key.
inline std::vector<std::string> dedup_entities(const std::vector<std::string>& items, bool company) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& raw : items) {
    auto display = text::trim(raw);
    if (display.empty()) continue;
    auto key = company ? text::normalize_company(display) : text::normalize_key(display);
    if (key.empty() || !seen.insert(key).second) continue;
    out.push_back(std::move(display));
  }
  return out;
}

namespace detail {

inline std::vector<std::string> string_list(const nlohmann::json& doc, const char* field) {
  std::vector<std::string> out;
  if (!doc.contains(field) || doc[field].is_null()) return out;
  const auto& v = doc[field];
  if (!v.is_array()) throw Error(ErrorCode::kSchemaInvalid, std::string("/") + field + ": expected array of strings");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      throw Error(ErrorCode::kSchemaInvalid,
                  std::string("/") + field + "/" + std::to_string(i) + ": expected string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

}  // namespace detail

// Schema check, enum coercion and entity dedup. Only `disruption_type` is
// mandatory; list fields default to empty.
inline DisruptionReport validate_report(const nlohmann::json& raw) {
  if (!raw.is_object()) throw Error(ErrorCode::kSchemaInvalid, "/: expected object");
  if (!raw.contains("disruption_type")) {
    throw Error(ErrorCode::kSchemaInvalid, "missing field 'disruption_type'");
  }
  const auto& t = raw["disruption_type"];
  if (!t.is_string()) throw Error(ErrorCode::kSchemaInvalid, "/disruption_type: expected string");
  auto type = parse_disruption_type(t.get<std::string>());
  if (!type) {
    throw Error(ErrorCode::kSchemaInvalid, "/disruption_type: unknown value '" + t.get<std::string>() + "'");
  }
  DisruptionReport r;
  r.disruption_type = *type;
  r.countries = dedup_entities(detail::string_list(raw, "countries"), false);
  r.industries = dedup_entities(detail::string_list(raw, "industries"), false);
  r.companies = dedup_entities(detail::string_list(raw, "companies"), true);
  if (raw.contains("summary") && !raw["summary"].is_null()) {
    if (!raw["summary"].is_string()) throw Error(ErrorCode::kSchemaInvalid, "/summary: expected string");
    r.summary = text::trim(raw["summary"].get<std::string>());
  }
  r.diagnostic_questions = detail::string_list(raw, "diagnostic_questions");
  return r;
}

inline DisruptionReport validate_report_text(std::string_view raw) {
  auto doc = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorCode::kSchemaInvalid, "backend response is not valid JSON");
  return validate_report(doc);
}

// ---------------------------------------------------------------------------
// Backend contract

// Bounds concurrent invocations of one backend.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::ptrdiff_t max_in_flight) : slots_(max_in_flight) {}

  class Slot {
   public:
    explicit Slot(InFlightLimiter& l) : limiter_(&l) { limiter_->slots_.acquire(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;
    ~Slot() { limiter_->slots_.release(); }

   private:
    InFlightLimiter* limiter_;
  };

 private:
  std::counting_semaphore<1024> slots_;
};

struct ExtractionBackend {
  using Invoke = std::function<nlohmann::json(std::string_view article, std::string_view focal)>;

  std::string name;
  Invoke invoke;  // throws Error{kBackendTimeout | kBackendFailure} on transport problems
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1'000};
  std::shared_ptr<InFlightLimiter> limiter = std::make_shared<InFlightLimiter>(4);
};

inline DisruptionReport extract_report(std::string_view article, std::string_view focal,
                                       const ExtractionBackend& backend) {
  if (text::trim(article).empty()) throw Error(ErrorCode::kEmptyInput, "article text is empty");
  if (!backend.invoke) throw Error(ErrorCode::kInvalidConfig, "extraction backend is not configured");

  auto backoff = backend.initial_backoff;
  const int attempts = 1 + std::max(0, backend.max_retries);
  for (int attempt = 1;; ++attempt) {
    nlohmann::json raw;
    try {
      std::optional<InFlightLimiter::Slot> slot;
      if (backend.limiter) slot.emplace(*backend.limiter);
      raw = backend.invoke(article, focal);
    } catch (const Error& e) {
      bool transient = e.code() == ErrorCode::kBackendTimeout || e.code() == ErrorCode::kBackendFailure;
      if (!transient) throw;
      if (attempt >= attempts) {
        throw Error(e.code(), "backend '" + backend.name + "' failed after " + std::to_string(attempts) +
                                  " attempts: " + e.what());
      }
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
      continue;
    }
    return validate_report(raw);
  }
}

// ---------------------------------------------------------------------------
// Deterministic rule backend

enum class EntityKind { kCountry, kIndustry, kCompany };

struct GazetteerEntry {
  std::string term;
  EntityKind kind = EntityKind::kCountry;
  std::string canonical;
};

struct TypeKeyword {
  std::string keyword;
  DisruptionType type = DisruptionType::kOther;
  int priority = 0;
};

inline std::vector<GazetteerEntry> gazetteer_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedDocument, "gazetteer must be an array");
  std::vector<GazetteerEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string where = "gazetteer[" + std::to_string(i) + "]";
    GazetteerEntry e;
    e.term = detail::require_string(doc[i], "term", where);
    auto kind = detail::require_string(doc[i], "kind", where);
    if (kind == "country") e.kind = EntityKind::kCountry;
    else if (kind == "industry") e.kind = EntityKind::kIndustry;
    else if (kind == "company") e.kind = EntityKind::kCompany;
    else throw Error(ErrorCode::kMalformedDocument, where + ": unknown kind '" + kind + "'");
    e.canonical = detail::require_string(doc[i], "canonical", where);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<TypeKeyword> lexicon_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedDocument, "type lexicon must be an array");
  std::vector<TypeKeyword> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string where = "lexicon[" + std::to_string(i) + "]";
    TypeKeyword k;
    k.keyword = detail::require_string(doc[i], "keyword", where);
    auto type = parse_disruption_type(detail::require_string(doc[i], "type", where));
    if (!type) throw Error(ErrorCode::kMalformedDocument, where + ": unknown disruption type");
    k.type = *type;
    if (doc[i].contains("priority")) {
      if (!doc[i]["priority"].is_number_integer()) {
        throw Error(ErrorCode::kMalformedDocument, where + ": priority must be an integer");
      }
      k.priority = doc[i]["priority"].get<int>();
    }
    out.push_back(std::move(k));
  }
  return out;
}

namespace detail {

inline bool is_word_byte(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

struct TermHit {
  std::size_t position;
  std::size_t index;  // into the term table
};

// Left-to-right scan; at each word start the longest term that ends on a word
// boundary wins and the scan resumes after it.
inline std::vector<TermHit> scan_terms(std::string_view article, const std::vector<std::string>& lowered_terms) {
  const auto lowered = text::to_lower(article);
  std::vector<TermHit> hits;
  std::size_t pos = 0;
  while (pos < lowered.size()) {
    if (!is_word_byte(lowered[pos]) || (pos > 0 && is_word_byte(lowered[pos - 1]))) {
      ++pos;
      continue;
    }
    std::optional<std::size_t> best;
    for (std::size_t t = 0; t < lowered_terms.size(); ++t) {
      const auto& term = lowered_terms[t];
      if (term.empty() || lowered.compare(pos, term.size(), term) != 0) continue;
      auto end = pos + term.size();
      if (end < lowered.size() && is_word_byte(lowered[end]) && is_word_byte(term.back())) continue;
      if (!best || term.size() > lowered_terms[*best].size()) best = t;
    }
    if (best) {
      hits.push_back({pos, *best});
      pos += lowered_terms[*best].size();
    } else {
      ++pos;
    }
  }
  return hits;
}

inline std::string first_sentence(std::string_view article) {
  auto trimmed = text::trim(article);
  std::size_t end = trimmed.size();
  for (std::size_t i = 0; i < trimmed.size(); ++i) {
    char c = trimmed[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == trimmed.size() || trimmed[i + 1] == ' ' || trimmed[i + 1] == '\n')) {
      end = i + 1;
      break;
    }
    if (c == '\n' && i + 1 < trimmed.size() && trimmed[i + 1] == '\n') {
      end = i;
      break;
    }
  }
  std::string s = text::trim(std::string_view(trimmed).substr(0, end));
  for (auto& c : s) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  if (s.size() > 280) s = s.substr(0, 277) + "...";
  return s;
}

}  // namespace detail

inline ExtractionBackend rule_backend(std::vector<GazetteerEntry> gazetteer, std::vector<TypeKeyword> lexicon) {
  if (gazetteer.empty() || lexicon.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "rule backend requires non-empty gazetteer and type lexicon");
  }
  struct Tables {
    std::vector<GazetteerEntry> gazetteer;
    std::vector<std::string> gazetteer_terms;
    std::vector<TypeKeyword> lexicon;
    std::vector<std::string> lexicon_terms;
  };
  auto tables = std::make_shared<Tables>();
  for (auto& e : gazetteer) tables->gazetteer_terms.push_back(text::to_lower(text::trim(e.term)));
  for (auto& k : lexicon) tables->lexicon_terms.push_back(text::to_lower(text::trim(k.keyword)));
  tables->gazetteer = std::move(gazetteer);
  tables->lexicon = std::move(lexicon);

  ExtractionBackend b;
  b.name = "rule";
  b.max_retries = 0;
  b.invoke = [tables](std::string_view article, std::string_view focal) -> nlohmann::json {
    std::vector<std::string> countries, industries, companies;
    for (const auto& hit : detail::scan_terms(article, tables->gazetteer_terms)) {
      const auto& e = tables->gazetteer[hit.index];
      switch (e.kind) {
        case EntityKind::kCountry: countries.push_back(e.canonical); break;
        case EntityKind::kIndustry: industries.push_back(e.canonical); break;
        case EntityKind::kCompany: companies.push_back(e.canonical); break;
      }
    }
    countries = dedup_entities(countries, false);
    industries = dedup_entities(industries, false);
    companies = dedup_entities(companies, true);

    DisruptionType type = DisruptionType::kOther;
    std::optional<int> best_priority;
    for (const auto& hit : detail::scan_terms(article, tables->lexicon_terms)) {
      const auto& k = tables->lexicon[hit.index];
      if (!best_priority || k.priority > *best_priority) {
        best_priority = k.priority;
        type = k.type;
      }
    }

    std::vector<std::string> questions;
    const std::string firm = focal.empty() ? std::string("the monitored company") : std::string(focal);
    for (const auto& c : countries) {
      questions.push_back("Which suppliers in " + firm + "'s network up to Tier-4 are located in " + c + "?");
    }
    for (const auto& i : industries) {
      questions.push_back("Which suppliers in " + firm + "'s network up to Tier-4 operate in " + i + "?");
    }
    for (const auto& c : companies) {
      questions.push_back("Does " + firm + " depend on " + c + " at any tier up to Tier-4?");
    }
    return {{"disruption_type", to_string(type)},
            {"countries", countries},
            {"industries", industries},
            {"companies", companies},
            {"summary", detail::first_sentence(article)},
            {"diagnostic_questions", questions}};
  };
  return b;
}

}  // namespace tierwatch
