#pragma once
// Prompt templates for style generation, shortening and rephrasing, plus the
// pool of paraphrased generation instructions used for stability runs.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/error.hpp"

namespace stylespace {

enum class PromptKind { generation, shortening, rephrase };

inline std::string_view placeholder_for(PromptKind kind) {
  return kind == PromptKind::shortening ? "<style descriptions>" : "<document>";
}

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string text, PromptKind kind)
      : id_(std::move(id)), text_(std::move(text)), kind_(kind) {
    if (count_occurrences(text_, placeholder_for(kind_)) != 1) {
      throw ConfigError("template '" + id_ + "' must contain exactly one " +
                        std::string(placeholder_for(kind_)) + " placeholder");
    }
  }

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }
  PromptKind kind() const noexcept { return kind_; }

  std::string fill(std::string_view content) const {
    const auto ph = placeholder_for(kind_);
    const auto pos = text_.find(ph);
    std::string out;
    out.reserve(text_.size() + content.size());
    out.append(text_, 0, pos).append(content).append(text_, pos + ph.size());
    return out;
  }

 private:
  std::string id_;
  std::string text_;
  PromptKind kind_;
};

inline PromptTemplate generation_template() {
  return PromptTemplate(
      "generation",
      "[TASK]\n"
      "Please list the writing style attributes of the given text for each of the "
      "morphological, syntactic, semantic, and discourse levels.\n\n"
      "Each level should start with a paragraph heading then a list of short sentences "
      "describing the style where each sentence is in the format of \"The author is X.\" or "
      "\"The author uses X.\"\n"
      "[TEXT]\n<document>",
      PromptKind::generation);
}

inline PromptTemplate shortening_template() {
  return PromptTemplate(
      "shortening",
      "[TASK]: Please rewrite the following list of writing style bullet points into a "
      "single paragraph.\n\n[TEXT]: <style descriptions>",
      PromptKind::shortening);
}

inline PromptTemplate rephrase_template() {
  return PromptTemplate(
      "rephrase",
      "[TASK]: Rephrase the following list of writing style features into a single coherent "
      "description of a document's writing style. Keep every feature and do not add new "
      "ones.\n\n[FEATURES]:\n<document>",
      PromptKind::rephrase);
}

namespace detail {

inline constexpr std::string_view kLevelList =
    " - Morphological level\n - Syntactic level\n - Semantic level\n - Discourse level\n";

inline PromptTemplate variant(std::size_t i, std::string task, std::string rules) {
  std::string text = "[TASK]\n" + std::move(task) + "\n";
  text += kLevelList;
  text += "\n[RULES]\n - " + std::move(rules) + "\n\n[TEXT]: <document>";
  return PromptTemplate("variant-" + std::to_string(i), std::move(text), PromptKind::generation);
}

}  // namespace detail

// Twenty paraphrases of the generation instruction. Variant 0 is the original
// instruction; variants 1 and 2 follow the published paraphrase examples.
inline std::vector<PromptTemplate> paraphrased_generation_variants() {
  std::vector<PromptTemplate> v;
  v.push_back(PromptTemplate("variant-0", generation_template().text(), PromptKind::generation));
  const std::pair<const char*, const char*> items[] = {
      {"Generate a list detailing the writing style of the given text at the following levels:",
       "Begin each level with a heading, followed by a list of brief sentences describing the style."},
      {"Assess the writing style of the given text for each of the following levels:",
       "Each section should start with a heading, followed by a list of brief sentences describing the style."},
      {"Describe the stylistic properties of the given text at each of these levels:",
       "Open every level with a heading and list short sentences such as \"The author uses X.\""},
      {"Identify the writing style attributes of the text below for the following levels:",
       "Use one heading per level, then short sentences of the form \"The author is X.\" or \"The author uses X.\""},
      {"Characterize how the given text is written at each of the following levels:",
       "Start each level with its heading and follow it with brief style sentences."},
      {"List the stylistic features you observe in the given text at these levels:",
       "Give a heading for each level, then a bulleted list of concise style sentences."},
      {"Analyze the author's writing style in the given text across the following levels:",
       "Each level begins with a heading; describe the style in short sentences underneath."},
      {"Summarize the writing style of the provided text for each level listed below:",
       "Write a heading per level followed by short sentences starting with \"The author\"."},
      {"Break down the style of the given text into the following linguistic levels:",
       "Head each level separately and describe it with a list of brief sentences."},
      {"Report the writing style characteristics of the text below at each of these levels:",
       "Every level needs a heading and a list of short descriptive sentences."},
      {"Examine the given text and describe its style at the following levels:",
       "Put a heading before each level and list the style attributes as short sentences."},
      {"Enumerate the writing style traits of the given text for each of these levels:",
       "Begin with a heading for each level, then list brief sentences like \"The author is X.\""},
      {"Provide a level-by-level description of the writing style of the given text:",
       "Introduce each level with a heading, followed by concise sentences about the style."},
      {"Outline the stylistic choices made in the given text at the following levels:",
       "Use headings for the levels and short sentences for the attributes."},
      {"Explain the writing style of the text below with respect to these levels:",
       "Each level should have its own heading followed by a list of short sentences."},
      {"Determine the writing style attributes of the given passage for each level below:",
       "Start each part with a heading and list the style in brief sentences."},
      {"Profile the writing style of the given text along the following levels:",
       "For every level write a heading, then short sentences describing the author's style."},
      {"Note the distinctive style features of the given text at each of these levels:",
       "Give each level a heading and list brief sentences in the form \"The author uses X.\""},
      {"Catalogue the writing style of the given text for the following levels:",
       "Start each level with a heading followed by a short list of style sentences."},
  };
  std::size_t i = 1;
  for (const auto& [task, rules] : items) v.push_back(detail::variant(i++, task, rules));
  return v;
}

// Uniform seeded sampling of one variant per draw.
class VariantSampler {
 public:
  VariantSampler(std::vector<PromptTemplate> variants, std::uint64_t seed)
      : variants_(std::move(variants)), rng_(seed) {
    if (variants_.empty()) throw ConfigError("empty prompt variant pool");
  }

  const PromptTemplate& sample() {
    std::uniform_int_distribution<std::size_t> pick(0, variants_.size() - 1);
    return variants_[pick(rng_)];
  }

  std::size_t sample_index() {
    std::uniform_int_distribution<std::size_t> pick(0, variants_.size() - 1);
    return pick(rng_);
  }

  const std::vector<PromptTemplate>& variants() const noexcept { return variants_; }

 private:
  std::vector<PromptTemplate> variants_;
  std::mt19937_64 rng_;
};

}  // namespace stylespace
