#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "linkintent/errors.hpp"
#include "linkintent/ranking.hpp"
#include "linkintent/strings.hpp"

namespace linkintent {

// ---------------------------------------------------------------------------
// TREC-style relevance judgments: "topic 0 doc_id grade".

class Qrels {
 public:
  void add(const std::string& topic, const std::string& doc, int grade) {
    if (grade < 0) throw ValidationError("relevance grade must be non-negative");
    auto& per_topic = grades_[topic];
    if (per_topic.count(doc))
      throw ValidationError("duplicate qrels pair: " + topic + " / " + doc);
    per_topic[doc] = grade;
  }

  const std::map<std::string, std::map<std::string, int>>& topics() const { return grades_; }

  const std::map<std::string, int>* topic(std::string_view id) const {
    auto it = grades_.find(std::string(id));
    return it == grades_.end() ? nullptr : &it->second;
  }

  static Qrels parse(std::string_view content) {
    Qrels q;
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto cols = split_ws(line);
      if (cols.size() != 4)
        throw ParseError("qrels", line_no, "expected: topic 0 doc_id grade");
      try {
        q.add(cols[0], cols[2], std::stoi(cols[3]));
      } catch (const ValidationError&) {
        throw;
      } catch (const std::exception&) {
        throw ParseError("qrels", line_no, "invalid grade: " + cols[3]);
      }
    }
    return q;
  }

  static Qrels load(const std::string& path) { return parse(read_file(path)); }

 private:
  std::map<std::string, std::map<std::string, int>> grades_;
};

// ---------------------------------------------------------------------------
// TREC run files: "topic Q0 doc_id rank score tag".

class RunFile {
 public:
  std::string tag = "run";

  void add(const std::string& topic, RankedList ranking) {
    for (size_t i = 1; i < ranking.size(); ++i) {
      if (ranking[i].score > ranking[i - 1].score)
        throw ValidationError("run scores must be non-increasing for topic " + topic);
    }
    std::set<std::string> seen;
    for (const auto& e : ranking) {
      if (!seen.insert(e.doc_id).second)
        throw ValidationError("duplicate doc " + e.doc_id + " for topic " + topic);
    }
    topics_[topic] = std::move(ranking);
  }

  const std::map<std::string, RankedList>& topics() const { return topics_; }

  const RankedList* topic(std::string_view id) const {
    auto it = topics_.find(std::string(id));
    return it == topics_.end() ? nullptr : &it->second;
  }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& [topic, ranking] : topics_) {
      size_t rank = 0;
      for (const auto& e : ranking) {
        out << topic << " Q0 " << e.doc_id << " " << ++rank << " "
            << format_double(e.score, 6) << " " << tag << "\n";
      }
    }
    return out.str();
  }

  static RunFile parse(std::string_view content) {
    RunFile run;
    std::map<std::string, RankedList> staging;
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto cols = split_ws(line);
      if (cols.size() != 6)
        throw ParseError("run", line_no, "expected: topic Q0 doc_id rank score tag");
      double score;
      try {
        score = std::stod(cols[4]);
      } catch (const std::exception&) {
        throw ParseError("run", line_no, "invalid score: " + cols[4]);
      }
      staging[cols[0]].push_back(ScoredDoc{cols[2], score});
      run.tag = cols[5];
    }
    for (auto& [topic, ranking] : staging) run.add(topic, std::move(ranking));
    return run;
  }

  static RunFile load(const std::string& path) { return parse(read_file(path)); }
  void save(const std::string& path) const { write_file(path, serialize()); }

 private:
  std::map<std::string, RankedList> topics_;
};

// ---------------------------------------------------------------------------
// Ranking metrics.

enum class GainVariant { Linear, Exponential };

inline GainVariant parse_gain(std::string_view text) {
  std::string t = to_lower(trim(text));
  if (t == "linear") return GainVariant::Linear;
  if (t == "exp" || t == "exponential") return GainVariant::Exponential;
  throw ParseError("unknown gain variant: \"" + std::string(text) + "\"");
}

inline std::string to_string(GainVariant g) {
  return g == GainVariant::Linear ? "linear" : "exponential";
}

inline double gain_of(int grade, GainVariant variant) {
  if (variant == GainVariant::Linear) return static_cast<double>(grade);
  return std::pow(2.0, static_cast<double>(grade)) - 1.0;
}

/// nDCG@k with discount 1/log2(rank+1). The ideal DCG ranks all judged
/// documents by grade and truncates at k. Topics without any relevant
/// document score 0.
inline double ndcg_at_k(const RankedList& ranking, const std::map<std::string, int>& topic_qrels,
                        size_t k, GainVariant variant = GainVariant::Linear) {
  if (k < 1) throw ValidationError("k must be at least 1");
  std::vector<int> grades;
  grades.reserve(topic_qrels.size());
  for (const auto& [doc, grade] : topic_qrels) grades.push_back(grade);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double idcg = 0.0;
  for (size_t i = 0; i < grades.size() && i < k; ++i) {
    if (grades[i] <= 0) break;
    idcg += gain_of(grades[i], variant) / std::log2(static_cast<double>(i) + 2.0);
  }
  if (idcg <= 0.0) return 0.0;
  double dcg = 0.0;
  for (size_t i = 0; i < ranking.size() && i < k; ++i) {
    auto it = topic_qrels.find(ranking[i].doc_id);
    if (it == topic_qrels.end() || it->second <= 0) continue;
    dcg += gain_of(it->second, variant) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

/// Average precision with binary relevance (grade > 0). The denominator
/// is the total number of relevant documents in the qrels, so
/// unretrieved relevant documents contribute zero.
inline double average_precision(const RankedList& ranking,
                                const std::map<std::string, int>& topic_qrels) {
  size_t n_relevant = 0;
  for (const auto& [doc, grade] : topic_qrels) {
    if (grade > 0) ++n_relevant;
  }
  if (n_relevant == 0) return 0.0;
  double sum = 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < ranking.size(); ++i) {
    auto it = topic_qrels.find(ranking[i].doc_id);
    if (it != topic_qrels.end() && it->second > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(n_relevant);
}

// ---------------------------------------------------------------------------
// Run comparison shaped like a two-metric leaderboard.

struct RunScores {
  std::string name;
  double ndcg = 0.0;  // mean nDCG@k over qrels topics
  double map = 0.0;   // mean average precision over qrels topics
  size_t topics_scored = 0;
  std::vector<std::string> extra_topics;         // in run but not judged
  std::vector<std::string> zero_relevant_topics; // judged but nothing relevant
};

struct RunComparison {
  size_t eval_k = 10;
  GainVariant gain = GainVariant::Linear;
  std::vector<RunScores> rows;
  std::map<std::string, std::map<std::string, std::pair<double, double>>>
      per_topic;  // run -> topic -> (ndcg, ap)
};

/// Scores each run against the qrels: the mean runs over all judged
/// topics, with topics absent from a run contributing zero. Run topics
/// without judgments are flagged, not scored.
inline RunComparison evaluate_runs(const std::vector<std::pair<std::string, const RunFile*>>& runs,
                                   const Qrels& qrels, size_t eval_k = 10,
                                   GainVariant gain = GainVariant::Linear) {
  if (qrels.topics().empty()) throw ValidationError("qrels contain no topics");
  RunComparison cmp;
  cmp.eval_k = eval_k;
  cmp.gain = gain;
  for (const auto& [name, run] : runs) {
    RunScores row;
    row.name = name;
    double ndcg_sum = 0.0, map_sum = 0.0;
    for (const auto& [topic, judged] : qrels.topics()) {
      static const RankedList kEmpty;
      const RankedList* ranking = run->topic(topic);
      if (!ranking) ranking = &kEmpty;
      const double n = ndcg_at_k(*ranking, judged, eval_k, gain);
      const double ap = average_precision(*ranking, judged);
      ndcg_sum += n;
      map_sum += ap;
      ++row.topics_scored;
      cmp.per_topic[name][topic] = {n, ap};
      bool any_relevant = false;
      for (const auto& [doc, grade] : judged) any_relevant = any_relevant || grade > 0;
      if (!any_relevant) row.zero_relevant_topics.push_back(topic);
    }
    for (const auto& [topic, ranking] : run->topics()) {
      if (!qrels.topic(topic)) row.extra_topics.push_back(topic);
    }
    row.ndcg = ndcg_sum / static_cast<double>(row.topics_scored);
    row.map = map_sum / static_cast<double>(row.topics_scored);
    cmp.rows.push_back(std::move(row));
  }
  return cmp;
}

inline std::string comparison_tsv(const RunComparison& cmp) {
  std::ostringstream out;
  out << "run\tndcg@" << cmp.eval_k << "\tmap\n";
  for (const auto& row : cmp.rows)
    out << row.name << "\t" << format_double(row.ndcg, 4) << "\t" << format_double(row.map, 4)
        << "\n";
  return out.str();
}

inline std::string comparison_table(const RunComparison& cmp) {
  size_t width = 4;
  for (const auto& row : cmp.rows) width = std::max(width, row.name.size());
  std::ostringstream out;
  out << std::string(width - 3, ' ') << "run  nDCG@" << cmp.eval_k << "     MAP\n";
  for (const auto& row : cmp.rows) {
    out << std::string(width - row.name.size(), ' ') << row.name << "   "
        << format_double(row.ndcg, 4) << "  " << format_double(row.map, 4) << "\n";
  }
  return out.str();
}

}  // namespace linkintent
