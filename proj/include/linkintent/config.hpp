#pragma once

#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "linkintent/errors.hpp"
#include "linkintent/eval.hpp"
#include "linkintent/index.hpp"
#include "linkintent/rerank.hpp"
#include "linkintent/strings.hpp"

namespace linkintent {

/// Batch run configuration; every field can be overridden by a CLI
/// flag. Round-trips through its key = value file form.
struct RunConfig {
  std::string taxonomy_path;
  std::string mapping_path;
  std::string corpus_path;
  std::string tweet_labels_path;
  std::string query_labels_path;
  std::string qrels_path;
  std::string topics_path;
  std::string policy_path;
  std::string rules_path;
  std::string output_dir;
  Bm25Params bm25;
  RerankOptions rerank;
  GainVariant gain = GainVariant::Linear;
  size_t k = 50;       // retrieval depth
  size_t eval_k = 10;  // metric cutoff

  std::string serialize() const {
    std::ostringstream out;
    auto put = [&](const char* key, const std::string& value) {
      if (!value.empty()) out << key << " = " << value << "\n";
    };
    put("taxonomy", taxonomy_path);
    put("mapping", mapping_path);
    put("corpus", corpus_path);
    put("tweet_labels", tweet_labels_path);
    put("query_labels", query_labels_path);
    put("qrels", qrels_path);
    put("topics", topics_path);
    put("policy", policy_path);
    put("rules", rules_path);
    put("output_dir", output_dir);
    out << "k1 = " << format_double(bm25.k1, 6) << "\n";
    out << "b = " << format_double(bm25.b, 6) << "\n";
    out << "stats_scope = " << to_string(rerank.scope) << "\n";
    out << "repetition = " << rerank.repetition << "\n";
    out << "gain = " << to_string(gain) << "\n";
    out << "k = " << k << "\n";
    out << "eval_k = " << eval_k << "\n";
    return out.str();
  }

  static RunConfig parse(std::string_view content) {
    RunConfig cfg;
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("config", line_no, "expected key = value");
      std::string key = to_lower(std::string(trim(line.substr(0, eq))));
      std::string value(trim(line.substr(eq + 1)));
      if (key == "taxonomy") cfg.taxonomy_path = value;
      else if (key == "mapping") cfg.mapping_path = value;
      else if (key == "corpus") cfg.corpus_path = value;
      else if (key == "tweet_labels") cfg.tweet_labels_path = value;
      else if (key == "query_labels") cfg.query_labels_path = value;
      else if (key == "qrels") cfg.qrels_path = value;
      else if (key == "topics") cfg.topics_path = value;
      else if (key == "policy") cfg.policy_path = value;
      else if (key == "rules") cfg.rules_path = value;
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "k1") cfg.bm25.k1 = std::stod(value);
      else if (key == "b") cfg.bm25.b = std::stod(value);
      else if (key == "stats_scope") cfg.rerank.scope = parse_stats_scope(value);
      else if (key == "repetition") cfg.rerank.repetition = std::stoi(value);
      else if (key == "gain") cfg.gain = parse_gain(value);
      else if (key == "k") cfg.k = std::stoull(value);
      else if (key == "eval_k") cfg.eval_k = std::stoull(value);
      else throw ParseError("config", line_no, "unknown key: " + key);
    }
    return cfg;
  }

  static RunConfig load(const std::string& path) { return parse(read_file(path)); }
  void save(const std::string& path) const { write_file(path, serialize()); }
};

}  // namespace linkintent
