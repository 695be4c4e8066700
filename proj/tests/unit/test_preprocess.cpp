#include <gtest/gtest.h>

#include "crc/preprocess.hpp"
#include "crc/rng.hpp"
#include "../support/fixtures.hpp"

using namespace crc;

namespace {

std::size_t count_of(const std::string& text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Random hunk built from marked and context lines.
std::string random_hunk(Rng& rng) {
  static const char* words[] = {"foo", "bar()", "x = 1;", "", "return y", "-- sql", "a+b"};
  std::string hunk;
  const auto lines = rng.below(8);
  for (std::size_t i = 0; i < lines; ++i) {
    static const char* prefixes[] = {"-", "+", " ", "  -", "\t+", "  "};
    hunk += prefixes[rng.below(6)];
    hunk += ' ';
    hunk += words[rng.below(7)];
    if (i + 1 < lines) hunk += '\n';
  }
  return hunk;
}

}  // namespace

TEST(StripContext, KeepsChangedLinesInOrder) {
  EXPECT_EQ(strip_context("- a\n+ b\n  ctx"), "- a\n+ b");
  EXPECT_EQ(strip_context("  ctx only"), "");
  EXPECT_EQ(strip_context("+ x"), "+ x");
  EXPECT_EQ(strip_context("@@ -1,2 +1,2 @@\n ctx\n-a\r\n+b"), "-a\n+b");
}

TEST(StripContext, LenientVersusStrictIndentation) {
  EXPECT_EQ(strip_context("   + indented\n ctx"), "   + indented");
  EXPECT_EQ(strip_context("   + indented\n ctx", MarkerMode::Strict), "");
}

TEST(StripContext, Idempotent) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto hunk = random_hunk(rng);
    const auto once = strip_context(hunk);
    EXPECT_EQ(strip_context(once), once) << hunk;
  }
}

TEST(NormalizeMarkers, Examples) {
  EXPECT_EQ(normalize_markers("- old\n+ new"), "[DELETE] old [ADD] new");
  EXPECT_EQ(normalize_markers("+ only"), "[ADD] only");
  EXPECT_EQ(normalize_markers(""), "");
  EXPECT_EQ(normalize_markers("+"), "[ADD]");
}

TEST(NormalizeMarkers, UnmarkedLineRejected) {
  try {
    normalize_markers("x");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unmarked line"), std::string::npos);
  }
  EXPECT_THROW(normalize_markers("  + x", MarkerMode::Strict), ValidationError);
}

TEST(NormalizeMarkers, NoBareLeadingMarkerToken) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto out = normalize_markers(strip_context(random_hunk(rng)));
    std::size_t pos = 0;
    while (pos < out.size()) {
      const auto end = out.find(' ', pos);
      const auto tok = out.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      if (pos == 0) {
        EXPECT_TRUE(out.empty() || tok == "[ADD]" || tok == "[DELETE]") << out;
      }
      if (end == std::string::npos) break;
      pos = end + 1;
    }
  }
}

TEST(Fuse, Examples) {
  EXPECT_EQ(fuse("Fix this", "[ADD] x").fused_text, "Fix this [SEP] [ADD] x");
  EXPECT_EQ(fuse("c", "").fused_text, "c [SEP] ");
  const auto in = fuse("Keep me", "[DELETE] a b [ADD] c [ADD] d");
  EXPECT_EQ(in.comment, "Keep me");
  EXPECT_EQ(in.delete_lines, (std::vector<std::string>{"a b"}));
  EXPECT_EQ(in.add_lines, (std::vector<std::string>{"c", "d"}));
}

TEST(Preprocess, GoldenExample) {
  const auto in = preprocess(fixture::make_instance("g", "Why?", "- old\n+ new\n  ctx"));
  EXPECT_EQ(in.normalized_diff, "[DELETE] old [ADD] new");
  EXPECT_EQ(in.fused_text, "Why? [SEP] [DELETE] old [ADD] new");
  EXPECT_EQ(count_of(in.fused_text, "[SEP]"), 1u);
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("requires_same_anchor"), (std::vector<std::string>{"requires", "same", "anchor"}));
  EXPECT_EQ(tokenize("[ADD] fooBar"), (std::vector<std::string>{"[ADD]", "foo", "bar"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("HTTPServer.getURL()"),
            (std::vector<std::string>{"http", "server", "get", "url"}));
  EXPECT_EQ(tokenize("a [SEP] b"), (std::vector<std::string>{"a", "[SEP]", "b"}));
}

TEST(Tokenize, FusedHasAtLeastCommentTokens) {
  Rng rng(6);
  for (int i = 0; i < 300; ++i) {
    auto inst = fixture::make_instance("t", "Rename fooBar " + std::to_string(rng.below(99)),
                                       strip_context(random_hunk(rng)) + "\n+ x");
    const auto in = preprocess(inst);
    EXPECT_GE(tokenize(in.fused_text).size(), tokenize(inst.comment).size());
  }
}
