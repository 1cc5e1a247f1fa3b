#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace linkintent {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Ordered retrieval results: descending score, ties broken by
/// ascending doc id.
using RankedList = std::vector<ScoredDoc>;

inline void sort_ranked(RankedList& list) {
  std::stable_sort(list.begin(), list.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

}  // namespace linkintent
