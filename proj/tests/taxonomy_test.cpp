#include "linkintent/taxonomy.hpp"

#include <gtest/gtest.h>

#include <map>
#include <string>

#include "test_paths.hpp"

using namespace linkintent;

namespace {

Taxonomy shipped() { return Taxonomy::load(data_path("taxonomy.txt")); }

TEST(Taxonomy, ShippedFileValidates) {
  Taxonomy tax = shipped();
  ASSERT_EQ(tax.categories().size(), 6u);
  EXPECT_EQ(tax.class_count(), 26u);
  std::map<std::string, size_t> expected = {{"Share", 8},   {"Entertain", 2}, {"Offer", 4},
                                            {"Converse", 4}, {"Promote", 4},   {"Request", 4}};
  for (const auto& cat : tax.categories()) {
    ASSERT_TRUE(expected.count(cat.id)) << cat.id;
    EXPECT_EQ(cat.classes.size(), expected[cat.id]) << cat.id;
  }
}

TEST(Taxonomy, DeletingCategoryFailsValidation) {
  std::string text = read_file(data_path("taxonomy.txt"));
  auto begin = text.find("[category Promote]");
  auto end = text.find("[category Request]");
  ASSERT_NE(begin, std::string::npos);
  ASSERT_NE(end, std::string::npos);
  text.erase(begin, end - begin);
  EXPECT_THROW(Taxonomy::parse(text), ValidationError);
}

TEST(Taxonomy, EmptyFileIsParseError) {
  EXPECT_THROW(Taxonomy::parse(""), ParseError);
  EXPECT_THROW(Taxonomy::parse("# just a comment\n"), ParseError);
}

TEST(Taxonomy, DuplicateClassSlugRejected) {
  std::string text = read_file(data_path("taxonomy.txt"));
  auto pos = text.find("[class entertain.entertainment_news]");
  ASSERT_NE(pos, std::string::npos);
  std::string dup = text;
  dup.replace(pos, std::string("[class entertain.entertainment_news]").size(),
              "[class entertain.humorous_content]");
  EXPECT_THROW(Taxonomy::parse(dup), ValidationError);
}

TEST(Taxonomy, ResolveLabel) {
  Taxonomy tax = shipped();
  EXPECT_EQ(tax.resolve_label("promote"), IntentLabel::category("Promote"));
  EXPECT_EQ(tax.resolve_label("Information Sharing"), IntentLabel::category("Share"));
  auto cls = tax.resolve_label("To share sport-related content");
  EXPECT_EQ(cls.kind, LabelKind::Class);
  EXPECT_EQ(tax.category_of(cls), "Share");
  EXPECT_TRUE(tax.resolve_label("UNCERTAIN").is_uncertain());
  EXPECT_THROW(tax.resolve_label("banter"), LookupError);
}

TEST(Taxonomy, EveryClassNameResolvesToItsSlug) {
  Taxonomy tax = shipped();
  for (const auto& cat : tax.categories()) {
    for (const auto& cls : cat.classes) {
      auto label = tax.resolve_label(cls.name);
      EXPECT_EQ(label, IntentLabel::intent_class(cls.id)) << cls.name;
      EXPECT_EQ(tax.category_of(label), cat.id);
    }
  }
}

TEST(Taxonomy, SerializeRoundTrip) {
  Taxonomy tax = shipped();
  Taxonomy again = Taxonomy::parse(tax.serialize());
  EXPECT_TRUE(tax == again);
  EXPECT_EQ(tax.serialize(), again.serialize());
}

TEST(Taxonomy, DisplayNames) {
  Taxonomy tax = shipped();
  EXPECT_EQ(tax.display(IntentLabel::category("Share")), "Information Sharing (Share)");
  EXPECT_EQ(tax.display(IntentLabel::uncertain()), "");
  auto cls = tax.resolve_label("To share sport-related content");
  EXPECT_EQ(tax.display(cls), "Information Sharing (Share) To share sport-related content");
}

TEST(PriorMapping, ShippedTable) {
  Taxonomy tax = shipped();
  auto table = PriorMappingTable::load(data_path("taxonomy_mapping.tsv"), tax);
  EXPECT_EQ(table.map_prior(PriorSource::Alhadi2011, "Share resources"),
            (std::vector<std::string>{"Share"}));
  EXPECT_EQ(table.map_prior(PriorSource::GomezAdorno2014, "Question (QU)"),
            (std::vector<std::string>{"Offer", "Request"}));
  EXPECT_EQ(table.map_prior(PriorSource::Java2007, "Daily Chatter"),
            (std::vector<std::string>{"Converse"}));
  EXPECT_THROW(table.map_prior(PriorSource::Java2007, "Chitchat"), LookupError);
}

TEST(PriorMapping, EveryRowResolvesAndEntertainUnmapped) {
  Taxonomy tax = shipped();
  auto table = PriorMappingTable::load(data_path("taxonomy_mapping.tsv"), tax);
  ASSERT_FALSE(table.rows().empty());
  for (const auto& row : table.rows()) {
    auto targets = table.map_prior(row.source, row.source_label);
    EXPECT_FALSE(targets.empty());
    EXPECT_NE(row.target_category, "Entertain") << row.source_label;
    EXPECT_NE(tax.find_category(row.target_category), nullptr);
  }
}

TEST(PriorMapping, UnknownTargetRejected) {
  Taxonomy tax = shipped();
  EXPECT_THROW(PriorMappingTable::parse("alhadi2011\tSomething\tBanter\n", tax),
               ValidationError);
}

}  // namespace
