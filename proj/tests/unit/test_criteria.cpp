#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "crc/criteria.hpp"
#include "crc/preprocess.hpp"
#include "../support/fixtures.hpp"

using namespace crc;

namespace {

CriterionVerdicts all_true() {
  CriterionVerdicts v;
  for (auto id : kCriteria) v[id] = true;
  return v;
}

bool run(CriterionId id, const std::string& comment, const std::string& diff = "- old\n+ new") {
  const auto inst = fixture::make_instance("x", comment, diff);
  return check(id, inst, preprocess(inst));
}

}  // namespace

TEST(Catalog, ShapeMatchesTaxonomy) {
  const auto& cat = criteria_catalog();
  ASSERT_EQ(cat.size(), 11u);
  std::map<std::pair<Attribute, CriterionKind>, int> counts;
  std::set<std::string_view> ids;
  for (const auto& c : cat) {
    ++counts[{c.attribute, c.kind}];
    ids.insert(to_string(c.id));
    EXPECT_FALSE(c.description.empty());
  }
  EXPECT_EQ(ids.size(), 11u);
  EXPECT_EQ((counts[{Attribute::Relevance, CriterionKind::Essential}]), 1);
  EXPECT_EQ((counts[{Attribute::Relevance, CriterionKind::Optional}]), 2);
  EXPECT_EQ((counts[{Attribute::Informativeness, CriterionKind::Essential}]), 2);
  EXPECT_EQ((counts[{Attribute::Informativeness, CriterionKind::Optional}]), 2);
  EXPECT_EQ((counts[{Attribute::Expression, CriterionKind::Essential}]), 2);
  EXPECT_EQ((counts[{Attribute::Expression, CriterionKind::Optional}]), 2);
  EXPECT_EQ(criterion(CriterionId::EE2).title, "Polite and objective.");
  EXPECT_EQ(catalog_to_json().size(), 11u);
}

TEST(Aggregate, Examples) {
  auto v = all_true();
  v[CriterionId::RO2] = false;
  EXPECT_TRUE(aggregate(Attribute::Relevance, v));

  v = all_true();
  v[CriterionId::IE2] = false;
  EXPECT_FALSE(aggregate(Attribute::Informativeness, v));

  v = all_true();
  v[CriterionId::EO1] = false;
  v[CriterionId::EO2] = false;
  EXPECT_FALSE(aggregate(Attribute::Expression, v));
}

TEST(Aggregate, MissingCriterionNamed) {
  auto v = all_true();
  v.erase(CriterionId::IO2);
  try {
    aggregate(v);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("I.O2"), std::string::npos);
  }
  // The relevance aggregate does not need Informativeness criteria.
  EXPECT_NO_THROW(aggregate(Attribute::Relevance, v));
}

TEST(Aggregate, MonotoneAndIndependent) {
  for (unsigned mask = 0; mask < (1u << kCriterionCount); ++mask) {
    CriterionVerdicts v;
    for (std::size_t i = 0; i < kCriterionCount; ++i) v[kCriteria[i]] = (mask >> i) & 1u;
    const auto base = aggregate(v);
    for (std::size_t i = 0; i < kCriterionCount; ++i) {
      const auto flipped_id = kCriteria[i];
      if (v[flipped_id]) continue;
      auto up = v;
      up[flipped_id] = true;
      const auto after = aggregate(up);
      for (auto a : kAttributes) {
        if (base.at(a)) EXPECT_TRUE(after.at(a));
        if (criterion(flipped_id).attribute != a) EXPECT_EQ(base.at(a), after.at(a));
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Heuristics, ReferenceUrl) {
  EXPECT_TRUE(run(CriterionId::IO2, "See https://example.com/style#naming for details."));
  EXPECT_TRUE(run(CriterionId::IO2, "This duplicates #1234."));
  EXPECT_TRUE(run(CriterionId::IO2, "Tracked in PROJ-42."));
  EXPECT_FALSE(run(CriterionId::IO2, "I don't see why this is needed."));
}

TEST(Heuristics, ImpoliteComment) {
  EXPECT_FALSE(run(CriterionId::EE2, "wtf is i1, s2", "- (i1, s2, err2, s2) =>\n+ (i1, s2, errCode, err2, s2) =>"));
  EXPECT_FALSE(run(CriterionId::EE2, "You never test your code."));
  EXPECT_TRUE(run(CriterionId::EE2, "Could this be a separate method?"));
}

TEST(Heuristics, IrrelevantComment) {
  for (const std::string diff : {"- old\n+ new",
                                 "+    def print_the_page(**options)\n+      bridge.print_the_page(options)",
                                 "+ same = here + others; all.also()"}) {
    EXPECT_FALSE(run(CriterionId::RE1, "Same here. and also all others.", diff)) << diff;
  }
}

TEST(Heuristics, RelevantQuestionWithLocation) {
  const std::string diff =
      "-    self._internal = self._internal.resolved_copy\n"
      "+    self._update_internal_frame(\n"
      "+        self._internal.resolved_copy, requires_same_anchor=False";
  const std::string comment = "When do we need to set 'requires_same_anchor=False?'";
  EXPECT_TRUE(run(CriterionId::RE1, comment, diff));
  EXPECT_TRUE(run(CriterionId::RO1, comment, diff));
  const auto inst = fixture::make_instance("r", comment, diff);
  EXPECT_TRUE(HeuristicChecker().evaluate(inst, preprocess(inst)).at(Attribute::Relevance));
}

TEST(Heuristics, LocationRequiresIdentifierWithPhrase) {
  EXPECT_FALSE(run(CriterionId::RO1, "Same problem here."));
  EXPECT_TRUE(run(CriterionId::RO1, "The counter here is off by one.", "- counter += 2\n+ counter += 1"));
  EXPECT_TRUE(run(CriterionId::RO1, "See line 42."));
  EXPECT_TRUE(run(CriterionId::RO1, "The call to `parse_args` leaks.", "+ parse_args(argv)"));
}

TEST(Heuristics, UnderstandingDefaultsTrue) {
  EXPECT_TRUE(run(CriterionId::RO2, "anything"));
  HeuristicConfig cfg;
  cfg.force_understanding_false = true;
  const auto inst = fixture::make_instance("x", "anything");
  EXPECT_FALSE(HeuristicChecker(cfg).check(CriterionId::RO2, inst, preprocess(inst)));
}

TEST(Heuristics, InformativenessCaseStudies) {
  const std::string neg_diff = "-      LOG.info(x);\n+      LOG.finest(x);";
  EXPECT_FALSE(run(CriterionId::IE2, "This change is not correct.", neg_diff));

  const std::string pos_diff =
      "+       process.on('SIGUSR2', function () {\n"
      "+               log.reopenFileStreams();\n"
      "+       });";
  const std::string pos =
      "Check the linting is failing, 'log' is not defined. You can run locally 'npm run lint' to double check.";
  EXPECT_TRUE(run(CriterionId::IE1, pos, pos_diff));
  EXPECT_TRUE(run(CriterionId::IE2, pos, pos_diff));
  EXPECT_TRUE(run(CriterionId::IO1, pos, pos_diff));
}

TEST(Heuristics, ClearIntention) {
  EXPECT_TRUE(run(CriterionId::IE1, "Why not a map?"));
  EXPECT_TRUE(run(CriterionId::IE1, "Rename this to count."));
  EXPECT_TRUE(run(CriterionId::IE1, "Maybe we could cache it."));
  EXPECT_FALSE(run(CriterionId::IE1, "Interesting."));
}

TEST(Heuristics, ReasonByMarkerOrLength) {
  EXPECT_TRUE(run(CriterionId::IE2, "Use a set because lookups are hot."));
  EXPECT_FALSE(run(CriterionId::IE2, "Why?"));
  EXPECT_TRUE(run(CriterionId::IE2,
                  "The loop copies every element on each pass, and the vector is large in production."));
}

TEST(Heuristics, NextStep) {
  EXPECT_TRUE(run(CriterionId::IO1, "Use a deque instead."));
  EXPECT_TRUE(run(CriterionId::IO1, "Maybe call `reserve()` first."));
  EXPECT_FALSE(run(CriterionId::IO1, "Maybe not."));
}

TEST(Heuristics, Concise) {
  EXPECT_TRUE(run(CriterionId::EE1, "Fix the off-by-one in the loop bound."));
  EXPECT_FALSE(run(CriterionId::EE1, "This is basically just really not what we want."));
  std::string long_comment;
  for (int i = 0; i < 61; ++i) long_comment += "word ";
  EXPECT_FALSE(run(CriterionId::EE1, long_comment));
}

TEST(Heuristics, ReadableFormat) {
  EXPECT_TRUE(run(CriterionId::EO1, "Prefer `x.size() == 0` here."));
  EXPECT_FALSE(run(CriterionId::EO1, "Prefer x.size()==0 here."));
  EXPECT_FALSE(run(CriterionId::EO1, std::string("bad\x01\x02\x03\x04 bytes\x05\x06", 16)));
  EXPECT_TRUE(run(CriterionId::EO1, "See https://x.org/?a=b for context."));
}

TEST(Heuristics, Grammar) {
  EXPECT_TRUE(run(CriterionId::EO2, "This variable is never used."));
  EXPECT_TRUE(run(CriterionId::EO2, "Nested lambdas are hard to read, e.g. this one."));
  EXPECT_FALSE(run(CriterionId::EO2, "this variable is never used."));
  EXPECT_FALSE(run(CriterionId::EO2, "This is sooo slow."));
  EXPECT_FALSE(run(CriterionId::EO2, "Thsi varaible is nevr usd."));
  EXPECT_TRUE(run(CriterionId::EO2, "errCode should be checked first.", "+ errCode = f()"));
  EXPECT_TRUE(run(CriterionId::EO2, "Don't shadow `value` here; it's confusing."));
}

TEST(Heuristics, PureFunctionOfText) {
  const auto a = fixture::make_instance("a", "Rename `foo` because it shadows.", "+ foo = 1");
  auto b = a;
  b.id = "other";
  b.language = Language::Ruby;
  const HeuristicChecker checker;
  EXPECT_EQ(checker.check_all(a, preprocess(a)), checker.check_all(b, preprocess(b)));
}

TEST(Lexicons, DirectoryOverrideFallsBack) {
  const auto dir = std::filesystem::temp_directory_path() / "crc_lexicon_override";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "offensive_terms.txt") << "# custom\nmeh\n";
  }
  const HeuristicChecker checker({}, Lexicons::from_directory(dir));
  const auto inst = fixture::make_instance("x", "meh, wtf");
  EXPECT_FALSE(checker.check(CriterionId::EE2, inst, preprocess(inst)));
  EXPECT_TRUE(checker.lexicons().offensive_terms.count("meh"));
  EXPECT_FALSE(checker.lexicons().offensive_terms.count("wtf"));
  EXPECT_FALSE(checker.lexicons().english_words.empty());
  std::filesystem::remove_all(dir);
}
