#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "linkintent/errors.hpp"
#include "linkintent/strings.hpp"
#include "linkintent/taxonomy.hpp"

namespace linkintent {

inline constexpr size_t kStudyRaters = 5;

enum class StudyPhase { Study1, Study2a, Study2b, Expert };

inline std::string to_string(StudyPhase p) {
  switch (p) {
    case StudyPhase::Study1: return "study1";
    case StudyPhase::Study2a: return "study2a";
    case StudyPhase::Study2b: return "study2b";
    case StudyPhase::Expert: return "expert";
  }
  return "?";
}

inline StudyPhase parse_study_phase(std::string_view text) {
  std::string t = to_lower(trim(text));
  if (t == "study1") return StudyPhase::Study1;
  if (t == "study2a") return StudyPhase::Study2a;
  if (t == "study2b") return StudyPhase::Study2b;
  if (t == "expert") return StudyPhase::Expert;
  throw ValidationError("unknown study phase: \"" + std::string(text) + "\"");
}

struct AnnotationSet {
  std::string item_id;
  std::vector<std::pair<std::string, IntentLabel>> labels;  // (rater_id, label)
  StudyPhase phase = StudyPhase::Study1;
};

// ---------------------------------------------------------------------------
// Consensus over exactly five raters.

enum class ConsensusKind { HighConsensus, CompetingConsensus, SplitDecision, NoMajority };

inline std::string to_string(ConsensusKind k) {
  switch (k) {
    case ConsensusKind::HighConsensus: return "high_consensus";
    case ConsensusKind::CompetingConsensus: return "competing_consensus";
    case ConsensusKind::SplitDecision: return "split_decision";
    case ConsensusKind::NoMajority: return "no_majority";
  }
  return "?";
}

struct ConsensusOutcome {
  ConsensusKind kind = ConsensusKind::NoMajority;
  std::optional<IntentLabel> label;  // present for the three majority kinds
  bool is_nc_un = false;             // no majority, or the consensus label is uncertain

  friend bool operator==(const ConsensusOutcome&, const ConsensusOutcome&) = default;
};

/// Consensus rules for five raters:
///   >=4 votes for one label          -> high consensus
///   3 votes + the other 2 agreeing   -> competing consensus
///   3 votes + the other 2 differing  -> split decision
///   no label with >=3 votes          -> no majority
inline ConsensusOutcome classify_consensus(const std::vector<IntentLabel>& labels) {
  if (labels.size() != kStudyRaters)
    throw ValidationError("consensus requires exactly " + std::to_string(kStudyRaters) +
                          " labels, got " + std::to_string(labels.size()));
  std::map<IntentLabel, int> votes;
  for (const auto& l : labels) ++votes[l];
  const auto top = std::max_element(votes.begin(), votes.end(),
                                    [](const auto& a, const auto& b) { return a.second < b.second; });
  ConsensusOutcome out;
  if (top->second >= 4) {
    out.kind = ConsensusKind::HighConsensus;
    out.label = top->first;
  } else if (top->second == 3) {
    // Two labels remain besides the 3-vote winner.
    out.kind = votes.size() == 2 ? ConsensusKind::CompetingConsensus : ConsensusKind::SplitDecision;
    out.label = top->first;
  } else {
    out.kind = ConsensusKind::NoMajority;
  }
  out.is_nc_un =
      out.kind == ConsensusKind::NoMajority || (out.label && out.label->is_uncertain());
  return out;
}

// ---------------------------------------------------------------------------
// Chance-corrected agreement. Both statistics return nullopt when
// expected agreement equals 1 (a single category receives every
// assignment), where the coefficient is undefined.

/// Fleiss' kappa over an items x categories vote-count matrix with a
/// fixed number of raters per item.
inline std::optional<double> fleiss_kappa(const std::vector<std::vector<int>>& counts,
                                          int raters) {
  if (counts.empty()) throw ValidationError("fleiss_kappa requires at least one item");
  if (raters < 2) throw ValidationError("fleiss_kappa requires at least two raters");
  const size_t n_cats = counts.front().size();
  if (n_cats == 0) throw ValidationError("fleiss_kappa requires at least one category");
  const double n = raters;
  const double n_items = static_cast<double>(counts.size());
  std::vector<double> col_sum(n_cats, 0.0);
  double p_bar = 0.0;
  for (const auto& row : counts) {
    if (row.size() != n_cats) throw ValidationError("ragged matrix: column counts differ");
    int row_sum = 0;
    double sq = 0.0;
    for (size_t j = 0; j < n_cats; ++j) {
      if (row[j] < 0) throw ValidationError("vote counts must be non-negative");
      row_sum += row[j];
      sq += static_cast<double>(row[j]) * row[j];
      col_sum[j] += row[j];
    }
    if (row_sum != raters)
      throw ValidationError("ragged matrix: row sums to " + std::to_string(row_sum) +
                            ", expected " + std::to_string(raters));
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= n_items;
  double pe = 0.0;
  for (double s : col_sum) {
    const double pj = s / (n_items * n);
    pe += pj * pj;
  }
  if (pe >= 1.0) return std::nullopt;  // degenerate chance agreement
  return (p_bar - pe) / (1.0 - pe);
}

/// Cohen's kappa between two equal-length label sequences.
inline std::optional<double> cohens_kappa(const std::vector<IntentLabel>& a,
                                          const std::vector<IntentLabel>& b) {
  if (a.size() != b.size())
    throw ValidationError("cohens_kappa requires equal-length sequences (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw ValidationError("cohens_kappa requires nonempty sequences");
  const double n = static_cast<double>(a.size());
  std::map<IntentLabel, double> marg_a, marg_b;
  double agree = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    marg_a[a[i]] += 1.0;
    marg_b[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [lab, ca] : marg_a) {
    auto it = marg_b.find(lab);
    if (it != marg_b.end()) pe += (ca / n) * (it->second / n);
  }
  if (pe >= 1.0) return std::nullopt;
  return (po - pe) / (1.0 - pe);
}

/// Landis & Koch interpretation band for a kappa value.
inline std::string kappa_band(std::optional<double> kappa) {
  if (!kappa) return "undefined";
  double k = *kappa;
  if (k < 0.0) return "poor";
  if (k <= 0.20) return "slight";
  if (k <= 0.40) return "fair";
  if (k <= 0.60) return "moderate";
  if (k <= 0.80) return "substantial";
  return "almost perfect";
}

// ---------------------------------------------------------------------------
// Matrix construction and reports.

struct VoteMatrix {
  std::vector<std::vector<int>> counts;  // items x categories
  std::vector<IntentLabel> columns;      // category per column, sorted
  std::vector<std::string> item_ids;     // row order
  int raters = 0;
};

/// Builds the Fleiss vote matrix from annotation sets. All items must
/// carry the same number of labels.
inline VoteMatrix build_vote_matrix(const std::vector<AnnotationSet>& sets) {
  if (sets.empty()) throw ValidationError("no annotation items");
  VoteMatrix m;
  m.raters = static_cast<int>(sets.front().labels.size());
  std::set<IntentLabel> seen;
  for (const auto& s : sets) {
    if (static_cast<int>(s.labels.size()) != m.raters)
      throw ValidationError("ragged matrix: item " + s.item_id + " has " +
                            std::to_string(s.labels.size()) + " labels, expected " +
                            std::to_string(m.raters));
    for (const auto& [rater, lab] : s.labels) seen.insert(lab);
  }
  m.columns.assign(seen.begin(), seen.end());
  std::map<IntentLabel, size_t> col_of;
  for (size_t j = 0; j < m.columns.size(); ++j) col_of[m.columns[j]] = j;
  for (const auto& s : sets) {
    std::vector<int> row(m.columns.size(), 0);
    for (const auto& [rater, lab] : s.labels) ++row[col_of[lab]];
    m.counts.push_back(std::move(row));
    m.item_ids.push_back(s.item_id);
  }
  return m;
}

struct AgreementReport {
  std::optional<double> fleiss;
  size_t n_items = 0;
  int n_raters = 0;
  size_t n_categories = 0;
  std::string interpretation_band;
  std::map<ConsensusKind, size_t> outcome_histogram;
  size_t nc_un_count = 0;
};

inline AgreementReport agreement_report(const std::vector<AnnotationSet>& sets) {
  AgreementReport rep;
  VoteMatrix m = build_vote_matrix(sets);
  rep.fleiss = fleiss_kappa(m.counts, m.raters);
  rep.n_items = sets.size();
  rep.n_raters = m.raters;
  rep.n_categories = m.columns.size();
  rep.interpretation_band = kappa_band(rep.fleiss);
  if (m.raters == static_cast<int>(kStudyRaters)) {
    for (const auto& s : sets) {
      std::vector<IntentLabel> labels;
      for (const auto& [rater, lab] : s.labels) labels.push_back(lab);
      auto outcome = classify_consensus(labels);
      ++rep.outcome_histogram[outcome.kind];
      if (outcome.is_nc_un) ++rep.nc_un_count;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct IntentionDistribution {
  /// Percent of items per high-consensus label key, plus an "NC-UN"
  /// entry collecting every item without high consensus. Sums to 100.
  std::map<std::string, double> percent;
  /// Percent of items that are NC-UN in the strict sense: no majority,
  /// or consensus label uncertain.
  double nc_un_percent = 0.0;
  size_t n_items = 0;
};

inline IntentionDistribution intention_distribution(
    const std::map<std::string, ConsensusOutcome>& outcomes) {
  IntentionDistribution dist;
  dist.n_items = outcomes.size();
  if (outcomes.empty()) return dist;
  std::map<std::string, size_t> tally;
  size_t nc_un = 0;
  for (const auto& [id, out] : outcomes) {
    if (out.kind == ConsensusKind::HighConsensus) {
      ++tally[out.label->key()];
    } else {
      ++tally["NC-UN"];
    }
    if (out.is_nc_un) ++nc_un;
  }
  const double total = static_cast<double>(outcomes.size());
  for (const auto& [key, n] : tally)
    dist.percent[key] = 100.0 * static_cast<double>(n) / total;
  dist.nc_un_percent = 100.0 * static_cast<double>(nc_un) / total;
  return dist;
}

// ---------------------------------------------------------------------------

struct OutcomeTransition {
  std::string item_id;
  ConsensusKind before;
  ConsensusKind after;
  bool gained_majority = false;  // was NC-UN, now has a usable majority label
};

struct AgreementDelta {
  /// Percent of before-NC-UN items that gained a majority label; 0 when
  /// no item was NC-UN before.
  double gained_majority_percent = 0.0;
  size_t n_items = 0;
  size_t n_before_nc_un = 0;
  std::vector<OutcomeTransition> transitions;
};

inline AgreementDelta agreement_delta(const std::map<std::string, ConsensusOutcome>& before,
                                      const std::map<std::string, ConsensusOutcome>& after) {
  for (const auto& [id, out] : before) {
    if (!after.count(id)) throw ValidationError("item missing from after map: " + id);
  }
  for (const auto& [id, out] : after) {
    if (!before.count(id)) throw ValidationError("item missing from before map: " + id);
  }
  AgreementDelta delta;
  delta.n_items = before.size();
  size_t gained = 0;
  for (const auto& [id, b] : before) {
    const auto& a = after.at(id);
    OutcomeTransition t{id, b.kind, a.kind, false};
    if (b.is_nc_un) {
      ++delta.n_before_nc_un;
      if (!a.is_nc_un) {
        t.gained_majority = true;
        ++gained;
      }
    }
    delta.transitions.push_back(std::move(t));
  }
  if (delta.n_before_nc_un > 0)
    delta.gained_majority_percent =
        100.0 * static_cast<double>(gained) / static_cast<double>(delta.n_before_nc_un);
  return delta;
}

// ---------------------------------------------------------------------------
// Label file: item_id<TAB>rater_id<TAB>label<TAB>study_phase

inline std::vector<AnnotationSet> parse_annotations(std::string_view content,
                                                    const Taxonomy& taxonomy) {
  std::map<std::string, size_t> index;
  std::vector<AnnotationSet> sets;
  size_t line_no = 0;
  for (const auto& raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4)
      throw ParseError("annotations", line_no, "expected 4 tab-separated columns");
    const std::string item_id = std::string(trim(cols[0]));
    const std::string rater_id = std::string(trim(cols[1]));
    IntentLabel label = taxonomy.resolve_label(cols[2]);
    StudyPhase phase = parse_study_phase(cols[3]);
    auto it = index.find(item_id);
    if (it == index.end()) {
      index[item_id] = sets.size();
      sets.push_back(AnnotationSet{item_id, {}, phase});
      it = index.find(item_id);
    }
    AnnotationSet& set = sets[it->second];
    if (set.phase != phase)
      throw ValidationError("item " + item_id + " mixes study phases");
    for (const auto& [rid, lab] : set.labels) {
      if (rid == rater_id)
        throw ValidationError("duplicate rater " + rater_id + " for item " + item_id);
    }
    set.labels.emplace_back(rater_id, std::move(label));
  }
  for (const auto& s : sets) {
    if (s.phase == StudyPhase::Study1 && s.labels.size() != kStudyRaters)
      throw ValidationError("study1 item " + s.item_id + " has " +
                            std::to_string(s.labels.size()) + " labels, expected " +
                            std::to_string(kStudyRaters));
  }
  return sets;
}

inline std::vector<AnnotationSet> load_annotations(const std::string& path,
                                                   const Taxonomy& taxonomy) {
  return parse_annotations(read_file(path), taxonomy);
}

/// Consensus outcome per item; every item must carry exactly five labels.
inline std::map<std::string, ConsensusOutcome> consensus_outcomes(
    const std::vector<AnnotationSet>& sets) {
  std::map<std::string, ConsensusOutcome> out;
  for (const auto& s : sets) {
    std::vector<IntentLabel> labels;
    for (const auto& [rater, lab] : s.labels) labels.push_back(lab);
    out[s.item_id] = classify_consensus(labels);
  }
  return out;
}

}  // namespace linkintent
