#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "linkintent/errors.hpp"
#include "linkintent/strings.hpp"
#include "linkintent/taxonomy.hpp"

namespace linkintent {

enum class TweetType { Regular, Reply, Quoted };

inline std::string to_string(TweetType t) {
  switch (t) {
    case TweetType::Regular: return "regular";
    case TweetType::Reply: return "reply";
    case TweetType::Quoted: return "quoted";
  }
  return "?";
}

inline TweetType parse_tweet_type(std::string_view text) {
  std::string t = to_lower(trim(text));
  if (t == "regular") return TweetType::Regular;
  if (t == "reply") return TweetType::Reply;
  if (t == "quoted") return TweetType::Quoted;
  throw ValidationError("unknown tweet type: \"" + std::string(text) + "\"");
}

struct LinkedDoc {
  std::string url;
  std::string title;
  std::string body_text;
  bool fetch_ok = false;

  friend bool operator==(const LinkedDoc&, const LinkedDoc&) = default;
};

struct TweetRecord {
  std::string id;
  std::string text;
  TweetType tweet_type = TweetType::Regular;
  std::vector<std::string> urls;
  std::vector<LinkedDoc> linked_docs;  // parallel to urls
  int64_t likes = 0;
  int64_t replies = 0;
  int64_t retweets = 0;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  std::vector<TweetRecord> parent_context;  // only for replies / quoted tweets

  bool has_url() const { return !urls.empty(); }
  int64_t reactions() const { return likes + replies + retweets; }

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

// ---------------------------------------------------------------------------
// Property bucketing. Boundaries are lower-exclusive/upper-inclusive
// after the first bucket: [0,35) [35,70] (70,105] (105,175] (175,inf).

enum class LengthBucket { Lt35, B35To70, B71To105, B106To175, Gt175 };
enum class ReactionBucket { Zero, OneToFive, SixToTen, GtTen };

inline constexpr std::array<std::string_view, 5> kLengthBucketLabels = {
    "<35", "35–70", "71–105", "106–175", ">175"};
inline constexpr std::array<std::string_view, 4> kReactionBucketLabels = {"0", "1–5",
                                                                          "6–10", ">10"};

inline std::string_view label(LengthBucket b) {
  return kLengthBucketLabels[static_cast<size_t>(b)];
}
inline std::string_view label(ReactionBucket b) {
  return kReactionBucketLabels[static_cast<size_t>(b)];
}

/// Buckets by Unicode scalar count of the raw text, URLs included.
inline LengthBucket bucket_length(std::string_view text) {
  size_t n = utf8_length(text);
  if (n < 35) return LengthBucket::Lt35;
  if (n <= 70) return LengthBucket::B35To70;
  if (n <= 105) return LengthBucket::B71To105;
  if (n <= 175) return LengthBucket::B106To175;
  return LengthBucket::Gt175;
}

/// Buckets by likes + replies + retweets.
inline ReactionBucket bucket_reactions(const TweetRecord& r) {
  int64_t total = r.reactions();
  if (total <= 0) return ReactionBucket::Zero;
  if (total <= 5) return ReactionBucket::OneToFive;
  if (total <= 10) return ReactionBucket::SixToTen;
  return ReactionBucket::GtTen;
}

// ---------------------------------------------------------------------------
// JSON record form. Keys are emitted in a fixed order so that
// ingest -> serialize round-trips are byte-stable.

namespace detail {

inline int64_t require_count(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return 0;
  const auto& v = j.at(key);
  if (!v.is_number_integer())
    throw ValidationError(std::string(key) + " must be an integer");
  int64_t n = v.get<int64_t>();
  if (n < 0) throw ValidationError(std::string(key) + " must be non-negative");
  return n;
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ValidationError(std::string(key) + " must be an array");
  for (const auto& e : v) {
    if (!e.is_string()) throw ValidationError(std::string(key) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline TweetRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  TweetRecord r;
  if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
    throw ValidationError("record requires a nonempty string id");
  r.id = j.at("id").get<std::string>();
  if (j.contains("text")) {
    if (!j.at("text").is_string()) throw ValidationError("text must be a string");
    r.text = j.at("text").get<std::string>();
  }
  r.tweet_type =
      j.contains("type") ? parse_tweet_type(j.at("type").get<std::string>()) : TweetType::Regular;
  r.urls = detail::string_list(j, "urls");
  r.likes = detail::require_count(j, "likes");
  r.replies = detail::require_count(j, "replies");
  r.retweets = detail::require_count(j, "retweets");
  r.hashtags = detail::string_list(j, "hashtags");
  r.mentions = detail::string_list(j, "mentions");
  if (j.contains("linked_docs")) {
    const auto& docs = j.at("linked_docs");
    if (!docs.is_array()) throw ValidationError("linked_docs must be an array");
    for (const auto& d : docs) {
      LinkedDoc doc;
      doc.url = d.value("url", "");
      doc.title = d.value("title", "");
      doc.body_text = d.value("body_text", "");
      doc.fetch_ok = d.value("fetch_ok", false);
      if (!doc.fetch_ok && (!doc.title.empty() || !doc.body_text.empty()))
        throw ValidationError("linked doc with fetch_ok=false must have empty title and body");
      r.linked_docs.push_back(std::move(doc));
    }
    if (r.linked_docs.size() != r.urls.size())
      throw ValidationError("linked_docs must parallel urls (" +
                            std::to_string(r.linked_docs.size()) + " vs " +
                            std::to_string(r.urls.size()) + ")");
  } else {
    for (const auto& u : r.urls) r.linked_docs.push_back(LinkedDoc{u, "", "", false});
  }
  if (j.contains("parent_context")) {
    const auto& ctx = j.at("parent_context");
    if (!ctx.is_array()) throw ValidationError("parent_context must be an array");
    for (const auto& p : ctx) r.parent_context.push_back(record_from_json(p));
    if (!r.parent_context.empty() && r.tweet_type == TweetType::Regular)
      throw ValidationError("parent_context is only valid for replies and quoted tweets");
  }
  return r;
}

inline nlohmann::ordered_json record_to_json(const TweetRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["text"] = r.text;
  j["type"] = to_string(r.tweet_type);
  j["urls"] = r.urls;
  auto docs = nlohmann::ordered_json::array();
  for (const auto& d : r.linked_docs) {
    nlohmann::ordered_json dj;
    dj["url"] = d.url;
    dj["title"] = d.title;
    dj["body_text"] = d.body_text;
    dj["fetch_ok"] = d.fetch_ok;
    docs.push_back(std::move(dj));
  }
  j["linked_docs"] = std::move(docs);
  j["likes"] = r.likes;
  j["replies"] = r.replies;
  j["retweets"] = r.retweets;
  j["hashtags"] = r.hashtags;
  j["mentions"] = r.mentions;
  if (!r.parent_context.empty()) {
    auto ctx = nlohmann::ordered_json::array();
    for (const auto& p : r.parent_context) ctx.push_back(record_to_json(p));
    j["parent_context"] = std::move(ctx);
  }
  return j;
}

// ---------------------------------------------------------------------------

struct IngestIssue {
  size_t line;
  std::string message;
};

class Corpus {
 public:
  void add(TweetRecord r) {
    if (index_.count(r.id)) throw ValidationError("duplicate record id: " + r.id);
    index_[r.id] = records_.size();
    records_.push_back(std::move(r));
  }

  const std::vector<TweetRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const TweetRecord* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  /// Ids of records lacking URLs; such records cannot carry a
  /// URL-sharing intent annotation.
  std::vector<std::string> ids_without_urls() const {
    std::vector<std::string> out;
    for (const auto& r : records_) {
      if (!r.has_url()) out.push_back(r.id);
    }
    return out;
  }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& r : records_) out << record_to_json(r).dump() << "\n";
    return out.str();
  }

 private:
  std::vector<TweetRecord> records_;
  std::unordered_map<std::string, size_t> index_;
};

struct IngestResult {
  Corpus corpus;
  std::vector<IngestIssue> issues;  // rejected lines, with line numbers
};

/// Parses line-delimited JSON records. Invalid records are collected
/// as issues, not fatal; an unreadable file raises IoError.
inline IngestResult ingest_records(std::string_view content) {
  IngestResult result;
  size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      result.corpus.add(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      result.issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      result.issues.push_back({line_no, e.what()});
    }
  }
  return result;
}

inline IngestResult ingest_file(const std::string& path) {
  return ingest_records(read_file(path));
}

// ---------------------------------------------------------------------------
// Property distribution tables (type / length / reactions per intent group).

struct DistributionRow {
  std::string group;  // "All", a category id, or "NC-UN"
  size_t count = 0;
  std::array<double, 3> type_pct{};      // Regular, Replies, Quoted
  std::array<double, 5> length_pct{};    // per LengthBucket
  std::array<double, 4> reaction_pct{};  // per ReactionBucket
};

struct DistributionTable {
  std::vector<DistributionRow> rows;
};

namespace detail {

inline DistributionRow distribution_row(const std::string& group,
                                        const std::vector<const TweetRecord*>& recs) {
  DistributionRow row;
  row.group = group;
  row.count = recs.size();
  std::array<size_t, 3> type_n{};
  std::array<size_t, 5> len_n{};
  std::array<size_t, 4> react_n{};
  for (const auto* r : recs) {
    ++type_n[static_cast<size_t>(r->tweet_type)];
    ++len_n[static_cast<size_t>(bucket_length(r->text))];
    ++react_n[static_cast<size_t>(bucket_reactions(*r))];
  }
  const double total = static_cast<double>(recs.size());
  for (size_t i = 0; i < 3; ++i) row.type_pct[i] = 100.0 * static_cast<double>(type_n[i]) / total;
  for (size_t i = 0; i < 5; ++i) row.length_pct[i] = 100.0 * static_cast<double>(len_n[i]) / total;
  for (size_t i = 0; i < 4; ++i)
    row.reaction_pct[i] = 100.0 * static_cast<double>(react_n[i]) / total;
  return row;
}

}  // namespace detail

/// Distribution over the whole corpus ("All" row only). Empty corpus
/// yields an empty table.
inline DistributionTable corpus_stats(const Corpus& corpus) {
  DistributionTable table;
  if (corpus.empty()) return table;
  std::vector<const TweetRecord*> all;
  all.reserve(corpus.size());
  for (const auto& r : corpus.records()) all.push_back(&r);
  table.rows.push_back(detail::distribution_row("All", all));
  return table;
}

/// Distribution per intent group: "All", then each labeled category in
/// taxonomy order, then "NC-UN" (records labeled uncertain). Class
/// labels roll up to their parent category. Empty groups are omitted.
inline DistributionTable corpus_stats(const Corpus& corpus,
                                      const std::map<std::string, IntentLabel>& labels,
                                      const Taxonomy& taxonomy) {
  DistributionTable table = corpus_stats(corpus);
  if (corpus.empty()) {
    if (!labels.empty()) throw LookupError("labels supplied for an empty corpus");
    return table;
  }
  std::map<std::string, std::vector<const TweetRecord*>> by_group;
  std::vector<const TweetRecord*> nc_un;
  for (const auto& [id, lab] : labels) {
    const auto* rec = corpus.find(id);
    if (!rec) throw LookupError("labeled id not in corpus: " + id);
    if (lab.is_uncertain()) {
      nc_un.push_back(rec);
    } else {
      by_group[taxonomy.category_of(lab)].push_back(rec);
    }
  }
  for (const auto& cat : taxonomy.categories()) {
    auto it = by_group.find(cat.id);
    if (it != by_group.end())
      table.rows.push_back(detail::distribution_row(cat.id, it->second));
  }
  if (!nc_un.empty()) table.rows.push_back(detail::distribution_row("NC-UN", nc_un));
  return table;
}

}  // namespace linkintent
