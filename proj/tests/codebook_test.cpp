#include "linkintent/codebook.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace linkintent;

namespace {

WorkerGrouping worker(std::string id,
                      std::vector<std::pair<std::string, std::set<int>>> groups,
                      std::set<std::pair<int, int>> pairs = {}) {
  return WorkerGrouping{std::move(id), std::move(groups), std::move(pairs)};
}

// --- dedupe -----------------------------------------------------------------

TEST(Dedupe, CollapsesNormalizedDuplicates) {
  std::vector<IntentionCode> codes = {{1, "to share news"}, {2, "To share  news"}};
  auto result = dedupe_exact(codes);
  ASSERT_EQ(result.codes.size(), 1u);
  EXPECT_EQ(result.codes[0].id, 1);
  EXPECT_EQ(result.remap.at(2), 1);
  EXPECT_EQ(result.remap.at(1), 1);
}

TEST(Dedupe, DistinctListUnchanged) {
  std::vector<IntentionCode> codes = {{1, "to share news"}, {2, "to promote a product"}};
  auto result = dedupe_exact(codes);
  EXPECT_EQ(result.codes.size(), 2u);
}

TEST(Dedupe, SemanticNearDuplicatesSurvive) {
  // Near-duplicates flow through worker identity flags, not dedupe.
  std::vector<IntentionCode> codes = {{1, "to answer a question"},
                                      {2, "to provide an answer to a question"}};
  auto result = dedupe_exact(codes);
  EXPECT_EQ(result.codes.size(), 2u);
}

TEST(Dedupe, KeepsLowestIdRegardlessOfOrder) {
  std::vector<IntentionCode> codes = {{7, "TO HELP"}, {3, "to help"}, {5, "to  help"}};
  auto result = dedupe_exact(codes);
  ASSERT_EQ(result.codes.size(), 1u);
  EXPECT_EQ(result.codes[0].id, 3);
  EXPECT_EQ(result.remap.at(7), 3);
  EXPECT_EQ(result.remap.at(5), 3);
}

TEST(Dedupe, Idempotent) {
  std::vector<IntentionCode> codes = {{1, "to a"}, {2, "TO A"}, {3, "to b"}, {4, "to c"}};
  auto once = dedupe_exact(codes);
  auto twice = dedupe_exact(once.codes);
  ASSERT_EQ(once.codes.size(), twice.codes.size());
  for (size_t i = 0; i < once.codes.size(); ++i)
    EXPECT_EQ(once.codes[i].id, twice.codes[i].id);
}

// --- consensus merge ----------------------------------------------------------

TEST(Merge, MajorityFlagMerges) {
  std::vector<WorkerGrouping> gs;
  for (int w = 0; w < 5; ++w) {
    std::set<std::pair<int, int>> pairs;
    if (w < 3) pairs.insert({1, 2});
    gs.push_back(worker("w" + std::to_string(w), {{"g", {1, 2, 3}}}, pairs));
  }
  auto result = consensus_merge(gs);
  EXPECT_EQ(result.classes.size(), 2u);  // {1,2} and {3}
  EXPECT_EQ(result.discarded, 1u);
  EXPECT_EQ(result.classes[0], (std::vector<int>{1, 2}));
}

TEST(Merge, MinorityFlagDoesNotMerge) {
  std::vector<WorkerGrouping> gs;
  for (int w = 0; w < 5; ++w) {
    std::set<std::pair<int, int>> pairs;
    if (w < 2) pairs.insert({1, 2});
    gs.push_back(worker("w" + std::to_string(w), {{"g", {1, 2, 3}}}, pairs));
  }
  auto result = consensus_merge(gs);
  EXPECT_EQ(result.classes.size(), 3u);
  EXPECT_EQ(result.discarded, 0u);
}

TEST(Merge, UniverseMismatchRejected) {
  std::vector<WorkerGrouping> gs = {worker("a", {{"g", {1, 2}}}),
                                    worker("b", {{"g", {1, 2, 3}}})};
  EXPECT_THROW(consensus_merge(gs), ValidationError);
}

TEST(Merge, OverlappingGroupsRejected) {
  std::vector<WorkerGrouping> gs = {worker("a", {{"g1", {1, 2}}, {"g2", {2, 3}}})};
  EXPECT_THROW(consensus_merge(gs), ValidationError);
}

// --- consensus grouping ---------------------------------------------------------

TEST(Grouping, UnanimousGroupSurvives) {
  std::vector<WorkerGrouping> gs;
  for (int w = 0; w < 5; ++w)
    gs.push_back(worker("w" + std::to_string(w), {{"News", {1, 2, 3}}, {"Other", {4}}}));
  auto groups = consensus_grouping(gs);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].members, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(groups[0].name, "News");
  EXPECT_EQ(groups[1].members, (std::vector<int>{4}));
}

TEST(Grouping, TransitiveClosureJoinsChains) {
  // a-b co-grouped by three workers, b-c by three others, a-c never;
  // at threshold 3 both edges survive and the component closes over
  // all three codes.
  std::vector<WorkerGrouping> gs;
  for (int w = 0; w < 3; ++w)
    gs.push_back(worker("w" + std::to_string(w), {{"AB", {1, 2}}, {"C", {3}}}));
  for (int w = 3; w < 6; ++w)
    gs.push_back(worker("w" + std::to_string(w), {{"BC", {2, 3}}, {"A", {1}}}));
  auto groups = consensus_grouping(gs, 3);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].members, (std::vector<int>{1, 2, 3}));
  // Independent reachability check over majority edges.
  std::map<std::pair<int, int>, int> count;
  for (const auto& g : gs) {
    for (const auto& [name, members] : g.groups) {
      std::vector<int> v(members.begin(), members.end());
      for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j) ++count[{v[i], v[j]}];
    }
  }
  EXPECT_EQ((count[{1, 2}]), 3);
  EXPECT_EQ((count[{2, 3}]), 3);
  EXPECT_EQ((count[{1, 3}]), 0);
}

TEST(Grouping, SingletonsEverywhere) {
  std::vector<WorkerGrouping> gs;
  for (int w = 0; w < 3; ++w)
    gs.push_back(worker("w" + std::to_string(w),
                        {{"g1", {1}}, {"g2", {2}}, {"g3", {3}}}));
  auto groups = consensus_grouping(gs);
  ASSERT_EQ(groups.size(), 3u);
  for (const auto& g : groups) EXPECT_EQ(g.members.size(), 1u);
}

TEST(Grouping, NameTiesBreakLexicographically) {
  std::vector<WorkerGrouping> gs = {worker("w1", {{"Zeta", {1, 2}}}),
                                    worker("w2", {{"Alpha", {1, 2}}})};
  auto groups = consensus_grouping(gs, 2);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].name, "Alpha");
}

TEST(Grouping, OutputIsAlwaysAPartition) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int n_codes = 12;
    std::vector<WorkerGrouping> gs;
    for (int w = 0; w < 5; ++w) {
      std::vector<std::pair<std::string, std::set<int>>> groups(3);
      for (int g = 0; g < 3; ++g) groups[g].first = "g" + std::to_string(g);
      std::uniform_int_distribution<int> pick(0, 2);
      for (int c = 1; c <= n_codes; ++c) groups[pick(rng)].second.insert(c);
      std::erase_if(groups, [](const auto& g) { return g.second.empty(); });
      gs.push_back(worker("w" + std::to_string(w), std::move(groups)));
    }
    auto result = consensus_grouping(gs);
    std::set<int> covered;
    size_t total = 0;
    for (const auto& g : result) {
      covered.insert(g.members.begin(), g.members.end());
      total += g.members.size();
    }
    EXPECT_EQ(covered.size(), static_cast<size_t>(n_codes));
    EXPECT_EQ(total, static_cast<size_t>(n_codes));
  }
}

TEST(Grouping, RaisingThresholdOnlyRefines) {
  std::mt19937 rng(4711);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_codes = 10;
    std::vector<WorkerGrouping> gs;
    for (int w = 0; w < 5; ++w) {
      std::vector<std::pair<std::string, std::set<int>>> groups(2, {"", {}});
      groups[0].first = "a";
      groups[1].first = "b";
      std::uniform_int_distribution<int> pick(0, 1);
      for (int c = 1; c <= n_codes; ++c) groups[pick(rng)].second.insert(c);
      std::erase_if(groups, [](const auto& g) { return g.second.empty(); });
      gs.push_back(worker("w" + std::to_string(w), std::move(groups)));
    }
    auto component_of = [](const std::vector<ConsensusGroup>& groups) {
      std::map<int, int> comp;
      for (size_t i = 0; i < groups.size(); ++i) {
        for (int m : groups[i].members) comp[m] = static_cast<int>(i);
      }
      return comp;
    };
    for (int t = 1; t < 5; ++t) {
      auto low = component_of(consensus_grouping(gs, t));
      auto high = component_of(consensus_grouping(gs, t + 1));
      // Codes separated at threshold t stay separated at t+1.
      for (int a = 1; a <= n_codes; ++a) {
        for (int b = a + 1; b <= n_codes; ++b) {
          if (low.at(a) != low.at(b)) {
            EXPECT_NE(high.at(a), high.at(b));
          }
        }
      }
    }
  }
}

// --- file formats ------------------------------------------------------------------

TEST(CodebookFiles, ParseCodesAndGroupings) {
  auto codes = parse_codes("# codes\n1\tto share news\n2\tto promote\n");
  ASSERT_EQ(codes.size(), 2u);
  EXPECT_EQ(codes[1].text, "to promote");
  EXPECT_THROW(parse_codes("1\tto a\n1\tto b\n"), ValidationError);
  EXPECT_THROW(parse_codes("1\t \n"), ParseError);

  std::string g =
      "worker\tw1\n"
      "group\tNews\t1 2\n"
      "group\tAds\t3\n"
      "identical\t1 2\n"
      "worker\tw2\n"
      "group\tEverything\t1 2 3\n";
  auto gs = parse_groupings(g);
  ASSERT_EQ(gs.size(), 2u);
  EXPECT_EQ(gs[0].groups.size(), 2u);
  EXPECT_EQ(gs[0].identity_pairs.size(), 1u);
  EXPECT_EQ(gs[1].universe(), (std::set<int>{1, 2, 3}));
  EXPECT_THROW(parse_groupings("group\tX\t1\n"), ParseError);
}

}  // namespace
