#include "linkintent/rerank.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_paths.hpp"

using namespace linkintent;

namespace {

Taxonomy shipped() { return Taxonomy::load(data_path("taxonomy.txt")); }

Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& docs,
                   bool with_url = true) {
  Corpus corpus;
  for (const auto& [id, text] : docs) {
    TweetRecord r;
    r.id = id;
    r.text = text;
    if (with_url) r.urls = {"http://example.org/" + id};
    corpus.add(std::move(r));
  }
  return corpus;
}

LabelStore store_with(const std::map<std::string, IntentLabel>& tweet_labels) {
  LabelStore store;
  store.tweet_labels = tweet_labels;
  return store;
}

// --- augmentation -----------------------------------------------------------

TEST(Augment, QueryGainsCategoryDisplayTokens) {
  Taxonomy tax = shipped();
  std::string augmented =
      augment_query("thorpe return in 2012 olympics", IntentLabel::category("Share"), tax);
  Tokenizer tok;
  EXPECT_EQ(tok.tokenize(augmented),
            (std::vector<std::string>{"thorpe", "return", "in", "2012", "olympics",
                                      "information", "sharing", "share"}));
}

TEST(Augment, NoLabelAndUncertainAreNoOps) {
  Taxonomy tax = shipped();
  EXPECT_EQ(augment_query("q text", std::nullopt, tax), "q text");
  EXPECT_EQ(augment_query("q text", IntentLabel::uncertain(), tax), "q text");
}

TEST(Augment, DocWithoutUrlKeepsText) {
  Taxonomy tax = shipped();
  TweetRecord r;
  r.id = "d1";
  r.text = "no links here";
  auto doc = augment_doc(r, IntentLabel::category("Share"), tax);
  EXPECT_FALSE(doc.augmented);
  EXPECT_EQ(doc.augmented_text, "no links here");
  r.urls = {"http://x"};
  auto doc2 = augment_doc(r, IntentLabel::category("Share"), tax);
  EXPECT_TRUE(doc2.augmented);
  EXPECT_EQ(doc2.augmented_text, "no links here Information Sharing (Share)");
}

TEST(Augment, RepetitionFactor) {
  Taxonomy tax = shipped();
  TweetRecord r;
  r.id = "d1";
  r.text = "base";
  r.urls = {"http://x"};
  auto doc = augment_doc(r, IntentLabel::category("Promote"), tax, 2);
  EXPECT_EQ(doc.augmented_text,
            "base Promotion / Advertisement (Promote) Promotion / Advertisement (Promote)");
}

// --- rerank -------------------------------------------------------------------

TEST(Rerank, SharedIntentPreservesOrderOnEqualLengthDocs) {
  Taxonomy tax = shipped();
  auto corpus = make_corpus({{"d1", "thorpe thorpe olympics pool"},
                             {"d2", "thorpe olympics water races"},
                             {"d3", "thorpe swims around slowly"}});
  auto idx = InvertedIndex::build(corpus, Tokenizer{});
  auto baseline = idx.search_text(Bm25Params{}, "thorpe olympics", 50);
  ASSERT_EQ(baseline.size(), 3u);
  auto store = store_with({{"d1", IntentLabel::category("Share")},
                           {"d2", IntentLabel::category("Share")},
                           {"d3", IntentLabel::category("Share")}});
  auto reranked = rerank(idx, Bm25Params{}, "thorpe olympics", IntentLabel::category("Share"),
                         baseline, store, tax);
  ASSERT_EQ(reranked.size(), baseline.size());
  for (size_t i = 0; i < baseline.size(); ++i)
    EXPECT_EQ(reranked[i].doc_id, baseline[i].doc_id) << i;
}

TEST(Rerank, AlignedCandidateBeatsEqualScoreMisaligned) {
  Taxonomy tax = shipped();
  // Identical baseline scores by construction: same tf and length.
  auto corpus = make_corpus({{"da", "thorpe olympics alpha"}, {"db", "thorpe olympics beta"}});
  auto idx = InvertedIndex::build(corpus, Tokenizer{});
  auto baseline = idx.search_text(Bm25Params{}, "thorpe olympics", 50);
  ASSERT_EQ(baseline.size(), 2u);
  ASSERT_DOUBLE_EQ(baseline[0].score, baseline[1].score);
  auto store = store_with({{"db", IntentLabel::category("Share")},
                           {"da", IntentLabel::category("Entertain")}});
  auto reranked = rerank(idx, Bm25Params{}, "thorpe olympics", IntentLabel::category("Share"),
                         baseline, store, tax);
  ASSERT_EQ(reranked.size(), 2u);
  EXPECT_EQ(reranked[0].doc_id, "db");  // intent-aligned wins despite doc-id tie order
  EXPECT_GT(reranked[0].score, reranked[1].score);
}

TEST(Rerank, EmptyTopKYieldsEmpty) {
  Taxonomy tax = shipped();
  auto corpus = make_corpus({{"d1", "a"}});
  auto idx = InvertedIndex::build(corpus, Tokenizer{});
  auto out = rerank(idx, Bm25Params{}, "a", std::nullopt, {}, LabelStore{}, tax);
  EXPECT_TRUE(out.empty());
}

TEST(Rerank, OutputIsPermutationOfInput) {
  Taxonomy tax = shipped();
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> len(2, 9), word(0, 14), lab(0, 6);
  const char* cats[] = {"Share", "Entertain", "Offer", "Converse", "Promote", "Request"};
  for (int trial = 0; trial < 10; ++trial) {
    Corpus corpus;
    std::map<std::string, IntentLabel> labels;
    for (int d = 0; d < 40; ++d) {
      TweetRecord r;
      r.id = "d" + std::to_string(100 + d);
      for (int i = 0, L = len(rng); i < L; ++i) r.text += "w" + std::to_string(word(rng)) + " ";
      r.urls = {"http://x/" + r.id};
      int pick = lab(rng);
      if (pick < 6) labels[r.id] = IntentLabel::category(cats[pick]);
      corpus.add(std::move(r));
    }
    auto idx = InvertedIndex::build(corpus, Tokenizer{});
    auto baseline = idx.search_text(Bm25Params{}, "w1 w2 w3", 50);
    auto store = store_with(labels);
    for (StatsScope scope : {StatsScope::Mixed, StatsScope::CandidateSet}) {
      RerankOptions opt;
      opt.scope = scope;
      auto reranked = rerank(idx, Bm25Params{}, "w1 w2 w3", IntentLabel::category("Share"),
                             baseline, store, tax, opt);
      ASSERT_EQ(reranked.size(), baseline.size());
      std::set<std::string> in, out;
      for (const auto& e : baseline) in.insert(e.doc_id);
      for (const auto& e : reranked) out.insert(e.doc_id);
      EXPECT_EQ(in, out);
      for (size_t i = 1; i < reranked.size(); ++i) {
        EXPECT_TRUE(reranked[i - 1].score > reranked[i].score ||
                    (reranked[i - 1].score == reranked[i].score &&
                     reranked[i - 1].doc_id < reranked[i].doc_id));
      }
    }
  }
}

TEST(Rerank, AllUncertainStoreAndUnlabeledQueryIsIdentity) {
  Taxonomy tax = shipped();
  auto corpus = make_corpus({{"d1", "apple pie baking"},
                             {"d2", "apple apple sauce"},
                             {"d3", "pie crust tips"},
                             {"d4", "apple pie pie"}});
  auto idx = InvertedIndex::build(corpus, Tokenizer{});
  auto baseline = idx.search_text(Bm25Params{}, "apple pie", 50);
  ASSERT_GE(baseline.size(), 3u);
  LabelStore store;
  for (const auto& id : idx.doc_ids()) store.tweet_labels[id] = IntentLabel::uncertain();
  RerankReport report;
  auto reranked =
      rerank(idx, Bm25Params{}, "apple pie", std::nullopt, baseline, store, tax, {}, &report);
  ASSERT_EQ(reranked.size(), baseline.size());
  for (size_t i = 0; i < baseline.size(); ++i) {
    EXPECT_EQ(reranked[i].doc_id, baseline[i].doc_id);
    EXPECT_NEAR(reranked[i].score, baseline[i].score, 1e-12);
  }
  EXPECT_EQ(report.augmented, 0u);
  EXPECT_EQ(report.unlabeled, baseline.size());
}

TEST(Rerank, UnknownCandidateRejected) {
  Taxonomy tax = shipped();
  auto corpus = make_corpus({{"d1", "a"}});
  auto idx = InvertedIndex::build(corpus, Tokenizer{});
  RankedList fake = {{"ghost", 1.0}};
  EXPECT_THROW(rerank(idx, Bm25Params{}, "a", std::nullopt, fake, LabelStore{}, tax),
               LookupError);
}

// --- alignment policy & filter ---------------------------------------------------

AlignmentPolicy shipped_policy(const Taxonomy& tax) {
  return AlignmentPolicy::load(data_path("alignment_policy.txt"), tax);
}

TEST(Policy, ShippedFileValidatesAndCoversAllCategories) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  EXPECT_EQ(policy.action, AlignmentAction::Filter);
  EXPECT_TRUE(policy.accepts(NeedFacet::Informational, "Share"));
  EXPECT_TRUE(policy.accepts(NeedFacet::Transactional, "Promote"));
  EXPECT_FALSE(policy.accepts(NeedFacet::Informational, "Entertain"));
  EXPECT_TRUE(policy.never_acceptable.count("Entertain"));
}

TEST(Policy, UncoveredCategoryRejected) {
  Taxonomy tax = shipped();
  std::string text =
      "action = filter\n"
      "informational = Share\n"
      "transactional = Promote\n"
      "navigational = Share\n";
  EXPECT_THROW(AlignmentPolicy::parse(text, tax), ValidationError);
}

TEST(Filter, DropsEntertainUnderInformationalQuery) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  auto store = store_with({{"d1", IntentLabel::category("Share")},
                           {"d2", IntentLabel::category("Entertain")}});
  RankedList ranked = {{"d1", 2.0}, {"d2", 1.5}};
  FilterReport report;
  auto out = filter_misaligned(policy, QueryIntent::parse("I/U/C"), ranked, store, tax, &report);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].doc_id, "d1");  // information-sharing doc kept
  EXPECT_EQ(report.dropped, 1u);
}

TEST(Filter, UnlabeledAndUncertainPassThrough) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  auto store = store_with({{"d2", IntentLabel::uncertain()}});
  RankedList ranked = {{"d1", 2.0}, {"d2", 1.5}};
  auto out = filter_misaligned(policy, QueryIntent::parse("I/U/C"), ranked, store, tax);
  EXPECT_EQ(out.size(), 2u);
}

TEST(Filter, EmptyListStaysEmpty) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  auto out = filter_misaligned(policy, QueryIntent::parse("I/U/C"), {}, LabelStore{}, tax);
  EXPECT_TRUE(out.empty());
}

TEST(Filter, FilterActionIsIdempotent) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  auto store = store_with({{"d1", IntentLabel::category("Share")},
                           {"d2", IntentLabel::category("Entertain")},
                           {"d3", IntentLabel::category("Promote")},
                           {"d4", IntentLabel::category("Offer")}});
  RankedList ranked = {{"d1", 4.0}, {"d2", 3.0}, {"d3", 2.0}, {"d4", 1.0}};
  auto once = filter_misaligned(policy, QueryIntent::parse("I/U/C"), ranked, store, tax);
  auto twice = filter_misaligned(policy, QueryIntent::parse("I/U/C"), once, store, tax);
  EXPECT_EQ(once, twice);
}

TEST(Filter, DemoteZeroPenaltyIsIdentityUpToTieBreak) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  policy.action = AlignmentAction::Demote;
  policy.demote_penalty = 0.0;
  auto store = store_with({{"d1", IntentLabel::category("Entertain")},
                           {"d2", IntentLabel::category("Share")}});
  RankedList ranked = {{"d1", 2.0}, {"d2", 1.0}};
  auto out = filter_misaligned(policy, QueryIntent::parse("I/U/C"), ranked, store, tax);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].doc_id, "d1");
  EXPECT_DOUBLE_EQ(out[0].score, 2.0);
}

TEST(Filter, DemoteScalesAndResorts) {
  Taxonomy tax = shipped();
  auto policy = shipped_policy(tax);
  policy.action = AlignmentAction::Demote;
  policy.demote_penalty = 0.9;
  auto store = store_with({{"d1", IntentLabel::category("Entertain")},
                           {"d2", IntentLabel::category("Share")}});
  RankedList ranked = {{"d1", 2.0}, {"d2", 1.0}};
  FilterReport report;
  auto out = filter_misaligned(policy, QueryIntent::parse("I/U/C"), ranked, store, tax, &report);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].doc_id, "d2");
  EXPECT_NEAR(out[1].score, 0.2, 1e-12);
  EXPECT_EQ(report.demoted, 1u);
}

}  // namespace
