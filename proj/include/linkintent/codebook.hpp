#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linkintent/errors.hpp"
#include "linkintent/strings.hpp"

namespace linkintent {

struct IntentionCode {
  int id = 0;
  std::string text;  // normalized "to <verb> ..." phrasing
};

struct WorkerGrouping {
  std::string worker_id;
  /// Named groups forming a partition of the code-id universe.
  std::vector<std::pair<std::string, std::set<int>>> groups;
  /// Unordered code-id pairs the worker flagged as identical in meaning.
  std::set<std::pair<int, int>> identity_pairs;

  std::set<int> universe() const {
    std::set<int> u;
    for (const auto& [name, members] : groups) u.insert(members.begin(), members.end());
    return u;
  }
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(const std::set<int>& universe) {
    for (int id : universe) parent_[id] = id;
  }
  int find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);  // keep the smallest id as representative
    parent_[b] = a;
  }
  std::map<int, std::vector<int>> components() {
    std::map<int, std::vector<int>> comp;
    for (const auto& [id, p] : parent_) comp[find(id)].push_back(id);
    return comp;
  }

 private:
  std::map<int, int> parent_;
};

inline std::pair<int, int> ordered_pair(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

/// Validates that every grouping is a true partition of one shared
/// universe and returns that universe.
inline std::set<int> common_universe(const std::vector<WorkerGrouping>& groupings) {
  if (groupings.empty()) throw ValidationError("at least one worker grouping is required");
  std::set<int> universe = groupings.front().universe();
  for (const auto& g : groupings) {
    size_t total = 0;
    std::set<int> seen;
    for (const auto& [name, members] : g.groups) {
      total += members.size();
      seen.insert(members.begin(), members.end());
    }
    if (total != seen.size())
      throw ValidationError("worker " + g.worker_id + " has overlapping groups");
    if (seen != universe)
      throw ValidationError("worker " + g.worker_id + " covers a different code universe");
    for (const auto& [a, b] : g.identity_pairs) {
      if (!universe.count(a) || !universe.count(b))
        throw ValidationError("worker " + g.worker_id + " flags a pair outside the universe");
    }
  }
  return universe;
}

inline int default_threshold(size_t n_workers) {
  return static_cast<int>(n_workers / 2) + 1;  // strict majority
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct DedupeResult {
  std::vector<IntentionCode> codes;  // survivors, original order
  std::map<int, int> remap;          // every input id -> kept id
};

/// Collapses case-insensitive, whitespace-normalized exact duplicates
/// onto the lowest id. Semantic near-duplicates are left alone; those
/// are resolved by worker identity flags in consensus_merge.
inline DedupeResult dedupe_exact(const std::vector<IntentionCode>& codes) {
  DedupeResult result;
  std::map<std::string, int> first_seen;
  std::vector<IntentionCode> sorted = codes;
  std::sort(sorted.begin(), sorted.end(),
            [](const IntentionCode& a, const IntentionCode& b) { return a.id < b.id; });
  for (const auto& c : sorted) {
    std::string key = to_lower(normalize_ws(c.text));
    if (key.empty()) throw ValidationError("code " + std::to_string(c.id) + " is empty");
    auto it = first_seen.find(key);
    if (it == first_seen.end()) {
      first_seen[key] = c.id;
      result.remap[c.id] = c.id;
    } else {
      result.remap[c.id] = it->second;
    }
  }
  for (const auto& c : codes) {
    if (result.remap.at(c.id) == c.id) result.codes.push_back(c);
  }
  return result;
}

// ---------------------------------------------------------------------------

struct MergeResult {
  std::vector<std::vector<int>> classes;  // sorted members, sorted by least member
  size_t discarded = 0;                   // codes merged away
};

/// Union of identity pairs flagged by at least `threshold` workers
/// (default: strict majority). Codes in one equivalence class are
/// considered the same intention; all but the representative count as
/// discarded.
inline MergeResult consensus_merge(const std::vector<WorkerGrouping>& groupings,
                                   std::optional<int> threshold = std::nullopt) {
  std::set<int> universe = detail::common_universe(groupings);
  const int need = threshold.value_or(detail::default_threshold(groupings.size()));
  if (need < 1) throw ValidationError("threshold must be at least 1");
  std::map<std::pair<int, int>, int> flag_count;
  for (const auto& g : groupings) {
    for (const auto& [a, b] : g.identity_pairs) ++flag_count[detail::ordered_pair(a, b)];
  }
  detail::UnionFind uf(universe);
  for (const auto& [pair, n] : flag_count) {
    if (n >= need) uf.unite(pair.first, pair.second);
  }
  MergeResult result;
  for (auto& [root, members] : uf.components()) {
    std::sort(members.begin(), members.end());
    result.classes.push_back(std::move(members));
  }
  result.discarded = universe.size() - result.classes.size();
  return result;
}

// ---------------------------------------------------------------------------

struct ConsensusGroup {
  std::string name;
  std::vector<int> members;  // sorted
};

/// Affinity-mapping consensus: counts how many workers placed each code
/// pair in the same group, keeps pairs at or above the threshold, and
/// takes connected components. Components are named by the most
/// frequent worker-supplied group name among their kept edges (ties
/// break to the lexicographically smallest name).
inline std::vector<ConsensusGroup> consensus_grouping(
    const std::vector<WorkerGrouping>& groupings,
    std::optional<int> threshold = std::nullopt) {
  std::set<int> universe = detail::common_universe(groupings);
  const int need = threshold.value_or(detail::default_threshold(groupings.size()));
  if (need < 1) throw ValidationError("threshold must be at least 1");

  std::map<std::pair<int, int>, int> cooccur;
  for (const auto& g : groupings) {
    for (const auto& [name, members] : g.groups) {
      for (auto it = members.begin(); it != members.end(); ++it) {
        for (auto jt = std::next(it); jt != members.end(); ++jt)
          ++cooccur[detail::ordered_pair(*it, *jt)];
      }
    }
  }
  std::set<std::pair<int, int>> kept;
  detail::UnionFind uf(universe);
  for (const auto& [pair, n] : cooccur) {
    if (n >= need) {
      kept.insert(pair);
      uf.unite(pair.first, pair.second);
    }
  }

  std::vector<ConsensusGroup> out;
  for (auto& [root, members] : uf.components()) {
    std::sort(members.begin(), members.end());
    std::set<int> member_set(members.begin(), members.end());
    // Name votes: one per (worker, kept edge inside the component).
    std::map<std::string, int> name_votes;
    for (const auto& g : groupings) {
      for (const auto& [name, group_members] : g.groups) {
        for (const auto& e : kept) {
          if (member_set.count(e.first) && member_set.count(e.second) &&
              group_members.count(e.first) && group_members.count(e.second))
            ++name_votes[name];
        }
      }
    }
    if (name_votes.empty()) {
      // Singleton (or edge-free) component: vote by containing group names.
      for (const auto& g : groupings) {
        for (const auto& [name, group_members] : g.groups) {
          for (int m : members) {
            if (group_members.count(m)) ++name_votes[name];
          }
        }
      }
    }
    std::string best;
    int best_n = -1;
    for (const auto& [name, n] : name_votes) {
      if (n > best_n) {  // map order makes ties lexicographically smallest
        best = name;
        best_n = n;
      }
    }
    out.push_back(ConsensusGroup{best, std::move(members)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// File formats.
// Codes: id<TAB>text. Groupings: line-based records,
//   worker<TAB><id>
//   group<TAB><name><TAB><space-separated ids>
//   identical<TAB><id> <id>

inline std::vector<IntentionCode> parse_codes(std::string_view content) {
  std::vector<IntentionCode> codes;
  std::set<int> ids;
  size_t line_no = 0;
  for (const auto& raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw ParseError("codes", line_no, "expected id<TAB>text");
    IntentionCode c;
    try {
      c.id = std::stoi(cols[0]);
    } catch (const std::exception&) {
      throw ParseError("codes", line_no, "invalid id: " + cols[0]);
    }
    c.text = normalize_ws(cols[1]);
    if (c.text.empty()) throw ParseError("codes", line_no, "empty code text");
    if (!ids.insert(c.id).second) throw ValidationError("duplicate code id: " + cols[0]);
    codes.push_back(std::move(c));
  }
  return codes;
}

inline std::vector<IntentionCode> load_codes(const std::string& path) {
  return parse_codes(read_file(path));
}

inline std::vector<WorkerGrouping> parse_groupings(std::string_view content) {
  std::vector<WorkerGrouping> out;
  size_t line_no = 0;
  for (const auto& raw : split_lines(content)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols[0] == "worker") {
      if (cols.size() != 2) throw ParseError("groupings", line_no, "expected worker<TAB>id");
      out.push_back(WorkerGrouping{std::string(trim(cols[1])), {}, {}});
    } else if (cols[0] == "group") {
      if (out.empty()) throw ParseError("groupings", line_no, "group before any worker");
      if (cols.size() != 3)
        throw ParseError("groupings", line_no, "expected group<TAB>name<TAB>ids");
      std::set<int> members;
      for (const auto& tok : split_ws(cols[2])) members.insert(std::stoi(tok));
      if (members.empty()) throw ParseError("groupings", line_no, "group has no members");
      out.back().groups.emplace_back(normalize_ws(cols[1]), std::move(members));
    } else if (cols[0] == "identical") {
      if (out.empty()) throw ParseError("groupings", line_no, "identical before any worker");
      if (cols.size() != 2)
        throw ParseError("groupings", line_no, "expected identical<TAB>a b");
      auto ids = split_ws(cols[1]);
      if (ids.size() != 2) throw ParseError("groupings", line_no, "expected exactly two ids");
      out.back().identity_pairs.insert(
          detail::ordered_pair(std::stoi(ids[0]), std::stoi(ids[1])));
    } else {
      throw ParseError("groupings", line_no, "unknown record kind: " + cols[0]);
    }
  }
  return out;
}

inline std::vector<WorkerGrouping> load_groupings(const std::string& path) {
  return parse_groupings(read_file(path));
}

}  // namespace linkintent
