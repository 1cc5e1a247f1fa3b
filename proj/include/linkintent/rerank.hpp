#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "linkintent/errors.hpp"
#include "linkintent/index.hpp"
#include "linkintent/intent.hpp"
#include "linkintent/ranking.hpp"
#include "linkintent/strings.hpp"
#include "linkintent/taxonomy.hpp"

namespace linkintent {

// ---------------------------------------------------------------------------
// Intent augmentation: concatenate an intent label's display text onto
// a query or document before rescoring.

/// Appends the label's display text to the query. Uncertain labels and
/// absent labels leave the query unchanged.
inline std::string augment_query(std::string_view query_text,
                                 const std::optional<IntentLabel>& label,
                                 const Taxonomy& taxonomy) {
  if (!label || label->is_uncertain()) return std::string(query_text);
  std::string display = taxonomy.display(*label);
  if (display.empty()) return std::string(query_text);
  return std::string(query_text) + " " + display;
}

struct AugmentedDoc {
  std::string doc_id;
  std::string augmented_text;
  bool augmented = false;
};

/// Document-side augmentation. Records without URLs carry no
/// URL-sharing intent and keep their text unmodified, as do records
/// without a label or labeled uncertain.
inline AugmentedDoc augment_doc(const TweetRecord& record,
                                const std::optional<IntentLabel>& label,
                                const Taxonomy& taxonomy, int repetition = 1) {
  AugmentedDoc out{record.id, record.text, false};
  if (!record.has_url() || !label || label->is_uncertain()) return out;
  std::string display = taxonomy.display(*label);
  if (display.empty()) return out;
  for (int i = 0; i < repetition; ++i) out.augmented_text += " " + display;
  out.augmented = true;
  return out;
}

// ---------------------------------------------------------------------------

/// Where rescoring statistics come from.
///   Mixed: original query terms keep full-index df and avgdl, so their
///     contributions stay comparable to the first stage; intent terms
///     use df over the augmented candidate set.
///   CandidateSet: all statistics (df, N, avgdl, lengths) come from the
///     augmented candidate set alone.
enum class StatsScope { Mixed, CandidateSet };

inline StatsScope parse_stats_scope(std::string_view text) {
  std::string t = to_lower(trim(text));
  if (t == "mixed" || t == "full") return StatsScope::Mixed;
  if (t == "candidate" || t == "candidate-set") return StatsScope::CandidateSet;
  throw ParseError("unknown stats scope: \"" + std::string(text) + "\"");
}

inline std::string to_string(StatsScope s) {
  return s == StatsScope::Mixed ? "mixed" : "candidate";
}

struct RerankOptions {
  StatsScope scope = StatsScope::Mixed;
  int repetition = 1;  // times the intent display text is appended to a doc

  void validate() const {
    if (repetition < 1) throw ValidationError("repetition factor must be at least 1");
  }
};

struct RerankReport {
  size_t candidates = 0;
  size_t augmented = 0;
  size_t unlabeled = 0;  // candidates passed through without augmentation
};

/// Rescores the top-k candidates with BM25 over intent-augmented
/// representations. Output is a permutation of the input ids:
/// descending score, ties by ascending doc id. Candidates without a
/// label pass through unaugmented (counted in the report).
inline RankedList rerank(const InvertedIndex& index, const Bm25Params& params,
                         std::string_view query_text,
                         const std::optional<IntentLabel>& query_label,
                         const RankedList& top_k, const LabelStore& store,
                         const Taxonomy& taxonomy, const RerankOptions& options = {},
                         RerankReport* report = nullptr) {
  params.validate();
  options.validate();
  const Tokenizer& tok = index.tokenizer();

  // Per-candidate augmented term-frequency profile.
  struct Candidate {
    std::string id;
    std::map<std::string, uint32_t> tf;
    double orig_len = 0.0;
    double aug_len = 0.0;
  };
  std::vector<Candidate> cands;
  cands.reserve(top_k.size());
  RerankReport local;
  local.candidates = top_k.size();
  for (const auto& entry : top_k) {
    auto doc = index.doc_index(entry.doc_id);
    if (!doc) throw LookupError("candidate not in index: " + entry.doc_id);
    Candidate c;
    c.id = entry.doc_id;
    c.orig_len = index.doc_length(*doc);
    c.aug_len = c.orig_len;
    for (const auto& [tid, tf] : index.doc_terms(*doc)) c.tf[index.term(tid)] = tf;
    const IntentLabel* label = store.tweet_label(entry.doc_id);
    if (label && !label->is_uncertain()) {
      std::string display = taxonomy.display(*label);
      auto intent_tokens = tok.tokenize(display);
      for (int rep = 0; rep < options.repetition; ++rep) {
        for (const auto& t : intent_tokens) {
          ++c.tf[t];
          c.aug_len += 1.0;
        }
      }
      ++local.augmented;
    } else {
      ++local.unlabeled;
    }
    cands.push_back(std::move(c));
  }

  // Query terms: original text tokens plus the query-intent tokens.
  auto orig_tokens = tok.tokenize(query_text);
  std::set<std::string> orig_set(orig_tokens.begin(), orig_tokens.end());
  std::set<std::string> query_terms = orig_set;
  if (query_label && !query_label->is_uncertain()) {
    for (const auto& t : tok.tokenize(taxonomy.display(*query_label))) query_terms.insert(t);
  }

  // Candidate-set document frequencies over augmented representations.
  std::map<std::string, size_t> cand_df;
  for (const auto& c : cands) {
    for (const auto& t : query_terms) {
      if (c.tf.count(t)) ++cand_df[t];
    }
  }
  double cand_avgdl = 0.0;
  if (!cands.empty()) {
    for (const auto& c : cands) cand_avgdl += c.aug_len;
    cand_avgdl /= static_cast<double>(cands.size());
  }

  const bool mixed = options.scope == StatsScope::Mixed;
  RankedList out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    double score = 0.0;
    for (const auto& t : query_terms) {
      auto it = c.tf.find(t);
      if (it == c.tf.end()) continue;
      double idf, doc_len, avgdl;
      auto tid = index.term_id(t);
      if (mixed && orig_set.count(t) && tid) {
        idf = bm25_idf(index.n_docs(), index.doc_freq(*tid));
        doc_len = c.orig_len;
        avgdl = index.avg_doc_len();
      } else {
        idf = bm25_idf(cands.size(), cand_df[t]);
        doc_len = mixed ? c.orig_len : c.aug_len;
        avgdl = mixed ? index.avg_doc_len() : cand_avgdl;
      }
      if (avgdl <= 0.0) continue;
      score += idf * bm25_tf_weight(it->second, doc_len, avgdl, params);
    }
    out.push_back(ScoredDoc{c.id, score});
  }
  sort_ranked(out);
  if (report) *report = local;
  return out;
}

// ---------------------------------------------------------------------------
// Alignment policy: which document intent categories satisfy each query
// need facet, and what to do with the rest.

enum class AlignmentAction { Filter, Demote };

struct AlignmentPolicy {
  std::map<NeedFacet, std::set<std::string>> acceptable;  // need -> category ids
  std::set<std::string> never_acceptable;
  AlignmentAction action = AlignmentAction::Filter;
  double demote_penalty = 0.5;

  /// Every taxonomy category must be acceptable under some need facet
  /// or explicitly listed as never acceptable.
  void validate(const Taxonomy& taxonomy) const {
    for (NeedFacet f : {NeedFacet::Informational, NeedFacet::Navigational,
                        NeedFacet::Transactional}) {
      if (!acceptable.count(f))
        throw ValidationError("policy missing need facet: " + to_string(f));
    }
    if (demote_penalty < 0.0 || demote_penalty > 1.0)
      throw ValidationError("demote penalty must lie in [0,1]");
    for (const auto& cat : taxonomy.categories()) {
      bool covered = never_acceptable.count(cat.id) > 0;
      for (const auto& [need, cats] : acceptable) covered = covered || cats.count(cat.id) > 0;
      if (!covered)
        throw ValidationError("policy does not cover category " + cat.id +
                              " (accept it somewhere or list it under never)");
    }
  }

  bool accepts(NeedFacet need, const std::string& category) const {
    auto it = acceptable.find(need);
    return it != acceptable.end() && it->second.count(category) > 0;
  }

  static AlignmentPolicy parse(std::string_view content, const Taxonomy& taxonomy) {
    AlignmentPolicy p;
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("policy", line_no, "expected key = value");
      std::string key = to_lower(std::string(trim(line.substr(0, eq))));
      std::string value(trim(line.substr(eq + 1)));
      auto category_list = [&](std::string_view csv) {
        std::set<std::string> out;
        for (const auto& part : split(csv, ',')) {
          std::string name = normalize_ws(part);
          if (name.empty()) continue;
          const auto* cat = taxonomy.find_category(name);
          if (!cat) throw ValidationError("policy references unknown category: " + name);
          out.insert(cat->id);
        }
        return out;
      };
      if (key == "action") {
        std::string v = to_lower(value);
        if (v == "filter") p.action = AlignmentAction::Filter;
        else if (v == "demote") p.action = AlignmentAction::Demote;
        else throw ParseError("policy", line_no, "action must be filter or demote");
      } else if (key == "demote_penalty") {
        p.demote_penalty = std::stod(value);
      } else if (key == "informational") {
        p.acceptable[NeedFacet::Informational] = category_list(value);
      } else if (key == "navigational") {
        p.acceptable[NeedFacet::Navigational] = category_list(value);
      } else if (key == "transactional") {
        p.acceptable[NeedFacet::Transactional] = category_list(value);
      } else if (key == "never") {
        p.never_acceptable = category_list(value);
      } else {
        throw ParseError("policy", line_no, "unknown key: " + key);
      }
    }
    p.validate(taxonomy);
    return p;
  }

  static AlignmentPolicy load(const std::string& path, const Taxonomy& taxonomy) {
    return parse(read_file(path), taxonomy);
  }
};

struct FilterReport {
  size_t kept = 0;
  size_t dropped = 0;
  size_t demoted = 0;
  size_t unlabeled = 0;  // passed through untouched
};

/// Drops (or demotes) candidates whose intent category does not satisfy
/// the query's need facet. Unlabeled and uncertain-labeled candidates
/// always pass through untouched. The Filter action is idempotent;
/// Demote scales the score once per application.
inline RankedList filter_misaligned(const AlignmentPolicy& policy, const QueryIntent& query_intent,
                                    const RankedList& ranked, const LabelStore& store,
                                    const Taxonomy& taxonomy, FilterReport* report = nullptr) {
  FilterReport local;
  RankedList out;
  out.reserve(ranked.size());
  for (const auto& entry : ranked) {
    const IntentLabel* label = store.tweet_label(entry.doc_id);
    if (!label || label->is_uncertain()) {
      ++local.unlabeled;
      ++local.kept;
      out.push_back(entry);
      continue;
    }
    const std::string category = taxonomy.category_of(*label);
    if (policy.accepts(query_intent.need, category)) {
      ++local.kept;
      out.push_back(entry);
    } else if (policy.action == AlignmentAction::Filter) {
      ++local.dropped;
    } else {
      ++local.demoted;
      ++local.kept;
      out.push_back(ScoredDoc{entry.doc_id, entry.score * (1.0 - policy.demote_penalty)});
    }
  }
  if (policy.action == AlignmentAction::Demote) sort_ranked(out);
  if (report) *report = local;
  return out;
}

}  // namespace linkintent
