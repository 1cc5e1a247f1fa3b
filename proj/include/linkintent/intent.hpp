#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linkintent/corpus.hpp"
#include "linkintent/errors.hpp"
#include "linkintent/strings.hpp"
#include "linkintent/taxonomy.hpp"

namespace linkintent {

// ---------------------------------------------------------------------------
// Broder-style query facets, e.g. "I/U/C" for Informational /
// Undirected / Closed.

enum class NeedFacet { Informational, Navigational, Transactional };
enum class ScopeFacet { Directed, Undirected };
enum class OpennessFacet { Open, Closed };

inline std::string to_string(NeedFacet f) {
  switch (f) {
    case NeedFacet::Informational: return "Informational";
    case NeedFacet::Navigational: return "Navigational";
    case NeedFacet::Transactional: return "Transactional";
  }
  return "?";
}

struct QueryIntent {
  NeedFacet need = NeedFacet::Informational;
  ScopeFacet scope = ScopeFacet::Undirected;
  OpennessFacet openness = OpennessFacet::Open;

  /// Slash-joined facet initials, e.g. "I/U/C".
  std::string display() const {
    auto initial = [](auto f, const char* letters) { return letters[static_cast<int>(f)]; };
    std::string out;
    out.push_back(initial(need, "INT"));
    out.push_back('/');
    out.push_back(initial(scope, "DU"));
    out.push_back('/');
    out.push_back(initial(openness, "OC"));
    return out;
  }

  /// Accepts facet initials ("I/U/C") or full facet names
  /// ("Informational/Undirected/Closed"), case-insensitive.
  static QueryIntent parse(std::string_view text) {
    auto parts = split(normalize_ws(text), '/');
    if (parts.size() != 3)
      throw ParseError("query intent must have three facets, got \"" + std::string(text) + "\"");
    QueryIntent qi;
    std::string need = to_lower(trim(parts[0]));
    if (need == "i" || need == "informational") qi.need = NeedFacet::Informational;
    else if (need == "n" || need == "navigational") qi.need = NeedFacet::Navigational;
    else if (need == "t" || need == "transactional") qi.need = NeedFacet::Transactional;
    else throw ParseError("unknown need facet: " + parts[0]);
    std::string scope = to_lower(trim(parts[1]));
    if (scope == "d" || scope == "directed") qi.scope = ScopeFacet::Directed;
    else if (scope == "u" || scope == "undirected") qi.scope = ScopeFacet::Undirected;
    else throw ParseError("unknown scope facet: " + parts[1]);
    std::string open = to_lower(trim(parts[2]));
    if (open == "o" || open == "open") qi.openness = OpennessFacet::Open;
    else if (open == "c" || open == "closed") qi.openness = OpennessFacet::Closed;
    else throw ParseError("unknown openness facet: " + parts[2]);
    return qi;
  }

  friend bool operator==(const QueryIntent&, const QueryIntent&) = default;
};

// ---------------------------------------------------------------------------
// Gold label stores. These are the primary path; the heuristic
// classifier below is experimental and excluded from evaluation runs.

struct QueryLabel {
  QueryIntent facets;
  IntentLabel target;  // intent label in our taxonomy, used for augmentation
};

struct LabelStore {
  std::map<std::string, IntentLabel> tweet_labels;
  std::map<std::string, QueryLabel> query_labels;

  const IntentLabel* tweet_label(std::string_view id) const {
    auto it = tweet_labels.find(std::string(id));
    return it == tweet_labels.end() ? nullptr : &it->second;
  }
  const QueryLabel* query_label(std::string_view id) const {
    auto it = query_labels.find(std::string(id));
    return it == query_labels.end() ? nullptr : &it->second;
  }
};

/// Tweet label file: tweet_id<TAB>label
inline std::map<std::string, IntentLabel> parse_tweet_labels(std::string_view content,
                                                             const Taxonomy& taxonomy) {
  std::map<std::string, IntentLabel> out;
  size_t line_no = 0;
  for (const auto& raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2)
      throw ParseError("tweet labels", line_no, "expected tweet_id<TAB>label");
    std::string id(trim(cols[0]));
    if (out.count(id)) throw ValidationError("duplicate tweet id in label file: " + id);
    out[id] = taxonomy.resolve_label(cols[1]);
  }
  return out;
}

/// Query label file: query_id<TAB>facets<TAB>label
inline std::map<std::string, QueryLabel> parse_query_labels(std::string_view content,
                                                            const Taxonomy& taxonomy) {
  std::map<std::string, QueryLabel> out;
  size_t line_no = 0;
  for (const auto& raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw ParseError("query labels", line_no, "expected query_id<TAB>facets<TAB>label");
    std::string id(trim(cols[0]));
    if (out.count(id)) throw ValidationError("duplicate query id in label file: " + id);
    QueryLabel ql;
    ql.facets = QueryIntent::parse(cols[1]);
    ql.target = taxonomy.resolve_label(cols[2]);
    out[id] = std::move(ql);
  }
  return out;
}

inline LabelStore load_labels(const std::string& tweet_path, const std::string& query_path,
                              const Taxonomy& taxonomy) {
  LabelStore store;
  if (!tweet_path.empty()) store.tweet_labels = parse_tweet_labels(read_file(tweet_path), taxonomy);
  if (!query_path.empty()) store.query_labels = parse_query_labels(read_file(query_path), taxonomy);
  return store;
}

// ---------------------------------------------------------------------------
// Heuristic rule classifier (experimental). Rules fire in file order;
// matching rules add their weight to the label's score; the winning
// label's confidence is its capped total. No match yields
// (uncertain, 0).

enum class RuleField { Type, Text, Title, Url };

struct HeuristicRule {
  RuleField field = RuleField::Text;
  std::string pattern;  // substring (case-insensitive) or a tweet type name
  IntentLabel label;
  double weight = 0.0;
};

struct RuleSet {
  std::string version;
  std::vector<HeuristicRule> rules;
};

inline RuleSet parse_rules(std::string_view content, const Taxonomy& taxonomy) {
  RuleSet rs;
  size_t line_no = 0;
  for (const auto& raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols[0] == "version") {
      if (cols.size() != 2) throw ParseError("rules", line_no, "expected version<TAB>value");
      rs.version = std::string(trim(cols[1]));
      continue;
    }
    if (cols.size() != 4)
      throw ParseError("rules", line_no, "expected field<TAB>pattern<TAB>label<TAB>weight");
    HeuristicRule rule;
    std::string field = to_lower(trim(cols[0]));
    if (field == "type") rule.field = RuleField::Type;
    else if (field == "text") rule.field = RuleField::Text;
    else if (field == "title") rule.field = RuleField::Title;
    else if (field == "url") rule.field = RuleField::Url;
    else throw ParseError("rules", line_no, "unknown field: " + cols[0]);
    rule.pattern = to_lower(normalize_ws(cols[1]));
    if (rule.pattern.empty()) throw ParseError("rules", line_no, "empty pattern");
    if (rule.field == RuleField::Type) parse_tweet_type(rule.pattern);  // fail fast
    rule.label = taxonomy.resolve_label(cols[2]);
    try {
      rule.weight = std::stod(cols[3]);
    } catch (const std::exception&) {
      throw ParseError("rules", line_no, "invalid weight: " + cols[3]);
    }
    if (rule.weight <= 0.0 || rule.weight > 1.0)
      throw ParseError("rules", line_no, "weight must lie in (0,1]");
    rs.rules.push_back(std::move(rule));
  }
  return rs;
}

inline RuleSet load_rules(const std::string& path, const Taxonomy& taxonomy) {
  return parse_rules(read_file(path), taxonomy);
}

struct HeuristicResult {
  IntentLabel label;
  double confidence = 0.0;
};

inline HeuristicResult classify_heuristic(const TweetRecord& tweet, const RuleSet& rules) {
  std::map<IntentLabel, double> scores;
  std::map<IntentLabel, size_t> first_hit;
  size_t rule_no = 0;
  for (const auto& rule : rules.rules) {
    ++rule_no;
    bool match = false;
    switch (rule.field) {
      case RuleField::Type:
        match = to_string(tweet.tweet_type) == rule.pattern;
        break;
      case RuleField::Text:
        match = !tweet.text.empty() && icontains(tweet.text, rule.pattern);
        break;
      case RuleField::Title:
        for (const auto& d : tweet.linked_docs) {
          if (d.fetch_ok && icontains(d.title, rule.pattern)) {
            match = true;
            break;
          }
        }
        break;
      case RuleField::Url:
        for (const auto& u : tweet.urls) {
          if (icontains(u, rule.pattern)) {
            match = true;
            break;
          }
        }
        break;
    }
    if (!match) continue;
    scores[rule.label] += rule.weight;
    first_hit.emplace(rule.label, rule_no);
  }
  if (scores.empty()) return {IntentLabel::uncertain(), 0.0};
  const IntentLabel* best = nullptr;
  for (const auto& [label, score] : scores) {
    if (!best || score > scores.at(*best) ||
        (score == scores.at(*best) && first_hit.at(label) < first_hit.at(*best)))
      best = &label;
  }
  return {*best, std::min(1.0, scores.at(*best))};
}

}  // namespace linkintent
