#include "linkintent/config.hpp"

#include <gtest/gtest.h>

using namespace linkintent;

namespace {

TEST(Config, RoundTripsThroughFileForm) {
  RunConfig cfg;
  cfg.taxonomy_path = "data/taxonomy.txt";
  cfg.corpus_path = "data/demo/corpus.jsonl";
  cfg.output_dir = "out";
  cfg.bm25.k1 = 0.9;
  cfg.bm25.b = 0.4;
  cfg.rerank.scope = StatsScope::CandidateSet;
  cfg.rerank.repetition = 3;
  cfg.gain = GainVariant::Exponential;
  cfg.k = 25;
  cfg.eval_k = 5;
  auto again = RunConfig::parse(cfg.serialize());
  EXPECT_EQ(again.serialize(), cfg.serialize());
  EXPECT_EQ(again.taxonomy_path, cfg.taxonomy_path);
  EXPECT_EQ(again.corpus_path, cfg.corpus_path);
  EXPECT_DOUBLE_EQ(again.bm25.k1, 0.9);
  EXPECT_EQ(again.rerank.scope, StatsScope::CandidateSet);
  EXPECT_EQ(again.rerank.repetition, 3);
  EXPECT_EQ(again.gain, GainVariant::Exponential);
  EXPECT_EQ(again.k, 25u);
  EXPECT_EQ(again.eval_k, 5u);
}

TEST(Config, DefaultsMatchContract) {
  RunConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.bm25.k1, 1.2);
  EXPECT_DOUBLE_EQ(cfg.bm25.b, 0.75);
  EXPECT_EQ(cfg.k, 50u);
  EXPECT_EQ(cfg.eval_k, 10u);
  EXPECT_EQ(cfg.rerank.scope, StatsScope::Mixed);
  EXPECT_EQ(cfg.rerank.repetition, 1);
  EXPECT_EQ(cfg.gain, GainVariant::Linear);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(RunConfig::parse("nonsense = 1\n"), ParseError);
}

TEST(Config, CommentsAndBlanksIgnored) {
  auto cfg = RunConfig::parse("# comment\n\ncorpus = x.jsonl\n");
  EXPECT_EQ(cfg.corpus_path, "x.jsonl");
}

}  // namespace
