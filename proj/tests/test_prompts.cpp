#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "stylespace/prompts.hpp"

using namespace stylespace;

namespace {

std::string squash(const std::string& s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) out += (out.empty() ? "" : " ") + word;
  return out;
}

}  // namespace

TEST(PromptTemplate, PlaceholderRules) {
  EXPECT_THROW(PromptTemplate("t", "no placeholder", PromptKind::generation), ConfigError);
  EXPECT_THROW(PromptTemplate("t", "<document> and <document>", PromptKind::generation), ConfigError);
  EXPECT_THROW(PromptTemplate("t", "<document>", PromptKind::shortening), ConfigError);
  const PromptTemplate t("t", "A <document> B", PromptKind::rephrase);
  EXPECT_EQ(t.fill("x<document>y"), "A x<document>y B");
  const PromptTemplate s("s", "[<style descriptions>]", PromptKind::shortening);
  EXPECT_EQ(s.fill(""), "[]");
}

TEST(PromptTemplate, BuiltinsMatchPublishedWording) {
  EXPECT_EQ(squash(generation_template().text()),
            "[TASK] Please list the writing style attributes of the given text for each of the morphological, "
            "syntactic, semantic, and discourse levels. Each level should start with a paragraph heading then a "
            "list of short sentences describing the style where each sentence is in the format of \"The author "
            "is X.\" or \"The author uses X.\" [TEXT] <document>");
  EXPECT_EQ(squash(shortening_template().text()),
            "[TASK]: Please rewrite the following list of writing style bullet points into a single paragraph. "
            "[TEXT]: <style descriptions>");
  EXPECT_EQ(rephrase_template().kind(), PromptKind::rephrase);
  EXPECT_EQ(count_occurrences(rephrase_template().text(), "<document>"), 1u);
}

TEST(Variants, TwentyDistinctGenerationTemplates) {
  const auto v = paraphrased_generation_variants();
  ASSERT_EQ(v.size(), 20u);
  std::set<std::string> texts, ids;
  for (const auto& t : v) {
    EXPECT_EQ(t.kind(), PromptKind::generation);
    texts.insert(t.text());
    ids.insert(t.id());
    const auto filled = t.fill("DOC");
    EXPECT_NE(filled.find("DOC"), std::string::npos);
    for (const char* level : {"orphological", "yntactic", "emantic", "iscourse"}) {
      EXPECT_NE(t.text().find(level), std::string::npos) << t.id();
    }
  }
  EXPECT_EQ(texts.size(), 20u);
  EXPECT_EQ(ids.size(), 20u);
  EXPECT_EQ(v[0].text(), generation_template().text());
  EXPECT_EQ(v[0].id(), "variant-0");
  EXPECT_NE(v[1].text().find("Generate a list detailing the writing style"), std::string::npos);
  EXPECT_NE(v[2].text().find("Assess the writing style"), std::string::npos);
}

TEST(VariantSampler, PoolOfOne) {
  VariantSampler s({generation_template()}, 3);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(s.sample().id(), "generation");
  EXPECT_THROW(VariantSampler({}, 0), ConfigError);
}

TEST(VariantSampler, UniformOverTwenty) {
  VariantSampler s(paraphrased_generation_variants(), 11);
  std::vector<int> hits(20, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++hits[s.sample_index()];
  // 19 dof; 45 is beyond the 0.999 quantile (about 43.8).
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - draws / 20.0) * (h - draws / 20.0) / (draws / 20.0);
  EXPECT_LT(chi2, 45.0);
}

TEST(VariantSampler, SeededDeterminism) {
  VariantSampler a(paraphrased_generation_variants(), 5), b(paraphrased_generation_variants(), 5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.sample().id(), b.sample().id());
}
