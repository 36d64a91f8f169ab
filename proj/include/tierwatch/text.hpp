#pragma once

// Name normalization shared by entity resolution, extraction dedup and
// evaluation matching.

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tierwatch::text {

inline std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Lowercase, punctuation to blanks, whitespace collapsed. Bytes >= 0x80 are
// kept so UTF-8 names survive.
inline std::string normalize_key(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    bool word = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80 || (c >= 'A' && c <= 'Z');
    if (!word) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  }
  return out;
}

inline std::vector<std::string> tokens(std::string_view normalized) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    auto next = normalized.find(' ', pos);
    if (next == std::string_view::npos) next = normalized.size();
    if (next > pos) out.emplace_back(normalized.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

inline bool is_legal_suffix(std::string_view token) {
  static constexpr std::array<std::string_view, 11> kSuffixes = {
      "inc", "plc", "ag", "pjsc", "se", "ltd", "llc", "co", "corp", "gmbh", "sa"};
  return std::find(kSuffixes.begin(), kSuffixes.end(), token) != kSuffixes.end();
}

// Company tokens with trailing legal-form suffixes removed. A name made only
// of suffix tokens keeps its first token.
inline std::vector<std::string> company_tokens(std::string_view name) {
  auto toks = tokens(normalize_key(name));
  while (toks.size() > 1 && is_legal_suffix(toks.back())) toks.pop_back();
  return toks;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string normalize_company(std::string_view name) { return join(company_tokens(name), " "); }

// Jaccard similarity of two token sets; two empty sets compare as 0.
inline double token_set_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

}  // namespace tierwatch::text
