#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "linkintent/corpus.hpp"
#include "linkintent/errors.hpp"
#include "linkintent/ranking.hpp"
#include "linkintent/strings.hpp"

namespace linkintent {

// ---------------------------------------------------------------------------
// Tokenization: lowercased alphanumeric runs; URLs stripped before
// splitting; '#'/'@' sigils drop out naturally, their bodies survive.

struct TokenizerConfig {
  bool lowercase = true;
  bool strip_urls = true;
  bool keep_hashtag_body = true;
};

class Tokenizer {
 public:
  Tokenizer() = default;
  explicit Tokenizer(TokenizerConfig config) : config_(config) {}

  const TokenizerConfig& config() const { return config_; }

  std::vector<std::string> tokenize(std::string_view text) const {
    std::string work(text);
    if (config_.strip_urls) strip_urls(work);
    if (!config_.keep_hashtag_body) strip_hashtags(work);
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : work) {
      bool token_char = std::isalnum(c) || c >= 0x80;  // keep non-ASCII bytes
      if (token_char) {
        cur.push_back(config_.lowercase && c < 0x80
                          ? static_cast<char>(std::tolower(c))
                          : static_cast<char>(c));
      } else if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
  }

 private:
  static void strip_urls(std::string& text) {
    // Remove http(s)://... and www.... runs up to the next whitespace.
    size_t pos = 0;
    std::string out;
    while (pos < text.size()) {
      size_t hit = std::string::npos;
      for (std::string_view prefix : {"http://", "https://", "www."}) {
        size_t p = pos;
        while (true) {
          p = find_ci(text, prefix, p);
          if (p == std::string::npos) break;
          // "www." must start a word to count as a URL.
          if (prefix != "www." || p == 0 ||
              std::isspace(static_cast<unsigned char>(text[p - 1])) ||
              text[p - 1] == '[' || text[p - 1] == '(') {
            if (hit == std::string::npos || p < hit) hit = p;
            break;
          }
          ++p;
        }
      }
      if (hit == std::string::npos) {
        out.append(text, pos, text.size() - pos);
        break;
      }
      out.append(text, pos, hit - pos);
      size_t end = hit;
      while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
      out.push_back(' ');
      pos = end;
    }
    text = std::move(out);
  }

  static void strip_hashtags(std::string& text) {
    std::string out;
    size_t i = 0;
    while (i < text.size()) {
      if (text[i] == '#') {
        size_t j = i + 1;
        while (j < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
          ++j;
        if (j > i + 1) {
          out.push_back(' ');
          i = j;
          continue;
        }
      }
      out.push_back(text[i]);
      ++i;
    }
    text = std::move(out);
  }

  static size_t find_ci(const std::string& hay, std::string_view needle, size_t from) {
    if (needle.empty() || hay.size() < needle.size()) return std::string::npos;
    for (size_t i = from; i + needle.size() <= hay.size(); ++i) {
      if (iequals(std::string_view(hay).substr(i, needle.size()), needle)) return i;
    }
    return std::string::npos;
  }

  TokenizerConfig config_;
};

// ---------------------------------------------------------------------------

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const {
    if (!(k1 > 0.0)) throw ValidationError("k1 must be positive");
    if (b < 0.0 || b > 1.0) throw ValidationError("b must lie in [0,1]");
  }
};

/// Non-negative idf variant: ln(1 + (N - df + 0.5) / (df + 0.5)).
inline double bm25_idf(size_t n_docs, size_t df) {
  return std::log(1.0 + (static_cast<double>(n_docs) - static_cast<double>(df) + 0.5) /
                            (static_cast<double>(df) + 0.5));
}

/// Term-frequency saturation with document-length normalization.
inline double bm25_tf_weight(double tf, double doc_len, double avg_doc_len,
                             const Bm25Params& p) {
  return tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * doc_len / avg_doc_len));
}

struct Posting {
  uint32_t doc = 0;  // internal index
  uint32_t tf = 0;
};

struct IndexOptions {
  /// Concatenate fetched linked-document title and body onto the tweet
  /// text before indexing.
  bool include_linked_docs = false;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  static InvertedIndex build(const Corpus& corpus, const Tokenizer& tok,
                             IndexOptions options = {}) {
    InvertedIndex idx;
    idx.tokenizer_ = tok;
    for (const auto& r : corpus.records()) {
      std::string text = r.text;
      if (options.include_linked_docs) {
        for (const auto& d : r.linked_docs) {
          if (!d.fetch_ok) continue;
          if (!d.title.empty()) text += " " + d.title;
          if (!d.body_text.empty()) text += " " + d.body_text;
        }
      }
      idx.add_document(r.id, tok.tokenize(text));
    }
    return idx;
  }

  void add_document(const std::string& doc_id, const std::vector<std::string>& tokens) {
    if (doc_of_.count(doc_id)) throw ValidationError("duplicate doc id: " + doc_id);
    const auto doc = static_cast<uint32_t>(doc_ids_.size());
    doc_of_[doc_id] = doc;
    doc_ids_.push_back(doc_id);
    doc_len_.push_back(static_cast<uint32_t>(tokens.size()));
    total_len_ += tokens.size();
    std::map<std::string, uint32_t> tf;  // ordered: stable term registration
    for (const auto& t : tokens) ++tf[t];
    auto& fwd = forward_.emplace_back();
    fwd.reserve(tf.size());
    for (const auto& [term, n] : tf) {
      uint32_t tid = intern(term);
      postings_[tid].push_back(Posting{doc, n});
      fwd.emplace_back(tid, n);
    }
  }

  size_t n_docs() const { return doc_ids_.size(); }
  size_t n_terms() const { return terms_.size(); }
  double avg_doc_len() const {
    return doc_ids_.empty() ? 0.0
                            : static_cast<double>(total_len_) /
                                  static_cast<double>(doc_ids_.size());
  }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }

  std::optional<uint32_t> doc_index(std::string_view doc_id) const {
    auto it = doc_of_.find(std::string(doc_id));
    if (it == doc_of_.end()) return std::nullopt;
    return it->second;
  }
  uint32_t doc_length(uint32_t doc) const { return doc_len_[doc]; }

  std::optional<uint32_t> term_id(std::string_view term) const {
    auto it = term_of_.find(std::string(term));
    if (it == term_of_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& term(uint32_t tid) const { return terms_[tid]; }
  size_t doc_freq(uint32_t tid) const { return postings_[tid].size(); }
  const std::vector<Posting>& postings(uint32_t tid) const { return postings_[tid]; }

  /// (term id, tf) pairs of one document, ordered by term text.
  const std::vector<std::pair<uint32_t, uint32_t>>& doc_terms(uint32_t doc) const {
    return forward_[doc];
  }

  /// BM25 score of one document against the query tokens. The score is
  /// a sum over distinct query terms; terms missing from the document
  /// (or corpus) contribute zero.
  double score(const Bm25Params& params, const std::vector<std::string>& query_tokens,
               std::string_view doc_id) const {
    auto doc = doc_index(doc_id);
    if (!doc) throw LookupError("unknown doc id: " + std::string(doc_id));
    params.validate();
    std::map<std::string, bool> distinct;
    for (const auto& q : query_tokens) distinct[q] = true;
    double total = 0.0;
    for (const auto& [q, unused] : distinct) {
      auto tid = term_id(q);
      if (!tid) continue;
      uint32_t tf = 0;
      for (const auto& [t, n] : forward_[*doc]) {
        if (t == *tid) {
          tf = n;
          break;
        }
      }
      if (tf == 0) continue;
      total += bm25_idf(n_docs(), doc_freq(*tid)) *
               bm25_tf_weight(tf, doc_len_[*doc], avg_doc_len(), params);
    }
    return total;
  }

  /// Top-k retrieval: descending score, ties broken by ascending doc
  /// id, zero-score documents excluded.
  RankedList search(const Bm25Params& params, const std::vector<std::string>& query_tokens,
                    size_t k) const {
    params.validate();
    if (k < 1) throw ValidationError("k must be at least 1");
    std::vector<double> acc(doc_ids_.size(), 0.0);
    std::vector<uint32_t> touched;
    std::map<std::string, bool> distinct;
    for (const auto& q : query_tokens) distinct[q] = true;
    const double avgdl = avg_doc_len();
    for (const auto& [q, unused] : distinct) {
      auto tid = term_id(q);
      if (!tid) continue;
      const double idf = bm25_idf(n_docs(), doc_freq(*tid));
      for (const auto& post : postings_[*tid]) {
        if (acc[post.doc] == 0.0) touched.push_back(post.doc);
        acc[post.doc] += idf * bm25_tf_weight(post.tf, doc_len_[post.doc], avgdl, params);
      }
    }
    RankedList results;
    results.reserve(touched.size());
    for (uint32_t doc : touched) {
      if (acc[doc] > 0.0) results.push_back(ScoredDoc{doc_ids_[doc], acc[doc]});
    }
    sort_ranked(results);
    if (results.size() > k) results.resize(k);
    return results;
  }

  RankedList search_text(const Bm25Params& params, std::string_view query, size_t k) const {
    return search(params, tokenizer_.tokenize(query), k);
  }

  // --- snapshot (versioned text form) -------------------------------------

  std::string serialize() const {
    std::ostringstream out;
    out << "linkintent-index\t1\n";
    out << "config\t" << tokenizer_.config().lowercase << "\t" << tokenizer_.config().strip_urls
        << "\t" << tokenizer_.config().keep_hashtag_body << "\n";
    out << "docs\t" << doc_ids_.size() << "\n";
    for (size_t i = 0; i < doc_ids_.size(); ++i)
      out << doc_ids_[i] << "\t" << doc_len_[i] << "\n";
    std::vector<uint32_t> order(terms_.size());
    for (uint32_t i = 0; i < terms_.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return terms_[a] < terms_[b]; });
    out << "terms\t" << terms_.size() << "\n";
    for (uint32_t tid : order) {
      out << terms_[tid] << "\t" << postings_[tid].size();
      for (const auto& p : postings_[tid]) out << "\t" << p.doc << ":" << p.tf;
      out << "\n";
    }
    return out.str();
  }

  static InvertedIndex parse(std::string_view content) {
    auto lines = split_lines(content);
    size_t ln = 0;
    auto next = [&]() -> const std::string& {
      if (ln >= lines.size()) throw ParseError("index snapshot truncated");
      return lines[ln++];
    };
    auto header = split(next(), '\t');
    if (header.size() != 2 || header[0] != "linkintent-index")
      throw ParseError("not an index snapshot");
    if (header[1] != "1") throw ParseError("unsupported index snapshot version " + header[1]);
    InvertedIndex idx;
    auto cfg = split(next(), '\t');
    if (cfg.size() != 4 || cfg[0] != "config") throw ParseError("index snapshot: bad config line");
    TokenizerConfig tc;
    tc.lowercase = cfg[1] == "1";
    tc.strip_urls = cfg[2] == "1";
    tc.keep_hashtag_body = cfg[3] == "1";
    idx.tokenizer_ = Tokenizer(tc);
    auto docs = split(next(), '\t');
    if (docs.size() != 2 || docs[0] != "docs") throw ParseError("index snapshot: bad docs line");
    const size_t n_docs = std::stoull(docs[1]);
    for (size_t i = 0; i < n_docs; ++i) {
      auto cols = split(next(), '\t');
      if (cols.size() != 2) throw ParseError("index snapshot: bad doc line");
      idx.doc_of_[cols[0]] = static_cast<uint32_t>(idx.doc_ids_.size());
      idx.doc_ids_.push_back(cols[0]);
      idx.doc_len_.push_back(static_cast<uint32_t>(std::stoul(cols[1])));
      idx.total_len_ += idx.doc_len_.back();
    }
    idx.forward_.resize(n_docs);
    auto terms = split(next(), '\t');
    if (terms.size() != 2 || terms[0] != "terms")
      throw ParseError("index snapshot: bad terms line");
    const size_t n_terms = std::stoull(terms[1]);
    for (size_t i = 0; i < n_terms; ++i) {
      auto cols = split(next(), '\t');
      if (cols.size() < 2) throw ParseError("index snapshot: bad postings line");
      uint32_t tid = idx.intern(cols[0]);
      const size_t df = std::stoull(cols[1]);
      if (cols.size() != 2 + df) throw ParseError("index snapshot: postings count mismatch");
      for (size_t j = 0; j < df; ++j) {
        auto colon = cols[2 + j].find(':');
        if (colon == std::string::npos) throw ParseError("index snapshot: bad posting");
        Posting p;
        p.doc = static_cast<uint32_t>(std::stoul(cols[2 + j].substr(0, colon)));
        p.tf = static_cast<uint32_t>(std::stoul(cols[2 + j].substr(colon + 1)));
        if (p.doc >= n_docs) throw ParseError("index snapshot: posting references unknown doc");
        idx.postings_[tid].push_back(p);
        idx.forward_[p.doc].emplace_back(tid, p.tf);
      }
    }
    // Forward lists follow term-text order, matching add_document.
    for (auto& fwd : idx.forward_) {
      std::sort(fwd.begin(), fwd.end(), [&](const auto& a, const auto& b) {
        return idx.terms_[a.first] < idx.terms_[b.first];
      });
    }
    return idx;
  }

  void save(const std::string& path) const { write_file(path, serialize()); }
  static InvertedIndex load(const std::string& path) { return parse(read_file(path)); }

 private:
  uint32_t intern(const std::string& term) {
    auto it = term_of_.find(term);
    if (it != term_of_.end()) return it->second;
    const auto tid = static_cast<uint32_t>(terms_.size());
    term_of_[term] = tid;
    terms_.push_back(term);
    postings_.emplace_back();
    return tid;
  }

  Tokenizer tokenizer_;
  std::unordered_map<std::string, uint32_t> term_of_;
  std::vector<std::string> terms_;
  std::vector<std::vector<Posting>> postings_;
  std::unordered_map<std::string, uint32_t> doc_of_;
  std::vector<std::string> doc_ids_;
  std::vector<uint32_t> doc_len_;
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> forward_;
  uint64_t total_len_ = 0;
};

// ---------------------------------------------------------------------------
// Topic files: either TREC-style <top> blocks with <num>/<title> tags,
// or plain id<TAB>title lines.

struct Topic {
  std::string id;
  std::string title;
};

inline std::vector<Topic> parse_topics(std::string_view content) {
  std::vector<Topic> topics;
  bool trec = false;
  for (const auto& raw : split_lines(content)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    trec = line.front() == '<';
    break;
  }
  if (!trec) {
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto cols = split(line, '\t');
      if (cols.size() != 2) throw ParseError("topics", line_no, "expected id<TAB>title");
      topics.push_back(Topic{std::string(trim(cols[0])), normalize_ws(cols[1])});
    }
    return topics;
  }
  auto strip_tag = [](std::string s, std::string_view open, std::string_view close) {
    std::string low = to_lower(s);
    auto b = low.find(open);
    if (b != std::string::npos) s = s.substr(b + open.size());
    low = to_lower(s);
    auto e = low.find(close);
    if (e != std::string::npos) s = s.substr(0, e);
    return std::string(trim(s));
  };
  Topic cur;
  bool open = false;
  for (const auto& raw : split_lines(content)) {
    std::string line(trim(raw));
    std::string low = to_lower(line);
    if (low.rfind("<top>", 0) == 0) {
      cur = Topic{};
      open = true;
    } else if (low.rfind("</top>", 0) == 0) {
      if (!open || cur.id.empty()) throw ParseError("topic block missing <num>");
      topics.push_back(cur);
      open = false;
    } else if (low.rfind("<num>", 0) == 0) {
      std::string v = strip_tag(line, "<num>", "</num>");
      auto colon = v.find(':');
      if (colon != std::string::npos) v = v.substr(colon + 1);  // "Number: MB001"
      cur.id = std::string(trim(v));
    } else if (low.rfind("<title>", 0) == 0) {
      cur.title = normalize_ws(strip_tag(line, "<title>", "</title>"));
    }
  }
  return topics;
}

inline std::vector<Topic> load_topics(const std::string& path) {
  return parse_topics(read_file(path));
}

}  // namespace linkintent
