#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "crc/common.hpp"
#include "crc/preprocess.hpp"

namespace crc {

struct Criterion {
  CriterionId id;
  Attribute attribute;
  CriterionKind kind;
  std::string_view title;
  std::string_view description;
};

const std::array<Criterion, kCriterionCount>& criteria_catalog();
const Criterion& criterion(CriterionId id);
std::vector<CriterionId> criteria_of(Attribute attribute);

/// [{id, attribute, kind, title, description}, ...] in catalog order.
nlohmann::json catalog_to_json();

/// Positive iff every essential criterion of the attribute holds and at least
/// one optional criterion holds. Only that attribute's criteria are read.
/// Throws ValidationError naming the first missing criterion.
bool aggregate(Attribute attribute, const CriterionVerdicts& verdicts);
AttributeVerdicts aggregate(const CriterionVerdicts& verdicts);

// ---------------------------------------------------------------------------
// Heuristic checkers
// ---------------------------------------------------------------------------

/// Word lists backing the checkers. One entry per line in plain-text files;
/// '#' starts a comment. Phrases are matched on whole words, case-insensitive.
struct Lexicons {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> english_words;
  std::unordered_set<std::string> technical_words;
  std::unordered_set<std::string> imperative_verbs;
  std::unordered_set<std::string> offensive_terms;
  std::unordered_set<std::string> filler_words;
  std::vector<std::string> suggestion_phrases;
  std::vector<std::string> causal_markers;
  std::vector<std::string> doc_citation_phrases;
  std::vector<std::string> accusation_patterns;
  std::vector<std::string> positional_phrases;

  /// The lists compiled into the library from data/lexicons/.
  static std::shared_ptr<const Lexicons> bundled();
  /// Reads `<name>.txt` files from `dir`; names not found fall back to the
  /// bundled list.
  static std::shared_ptr<const Lexicons> from_directory(const std::filesystem::path& dir);
};

struct HeuristicConfig {
  // R.O2 has no automatic proxy; it reports true unless forced off.
  bool force_understanding_false = false;
  std::size_t informative_min_tokens = 12;
  std::size_t informative_min_clauses = 2;
  std::size_t concise_max_tokens = 60;
  std::size_t filler_run = 3;
  double min_printable_ratio = 0.95;
  bool quotes_count_as_fence = true;
  std::size_t repeated_char_run = 3;
  // Sentence-initial lowercase words tolerated by E.O2 (e.g. "nit").
  bool allow_lowercase_start = false;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HeuristicConfig, force_understanding_false,
                                                informative_min_tokens, informative_min_clauses,
                                                concise_max_tokens, filler_run, min_printable_ratio,
                                                quotes_count_as_fence, repeated_char_run,
                                                allow_lowercase_start)

class HeuristicChecker {
 public:
  explicit HeuristicChecker(HeuristicConfig config = {},
                            std::shared_ptr<const Lexicons> lexicons = Lexicons::bundled());

  bool check(CriterionId id, const ReviewInstance& instance,
             const NormalizedInput& input) const;
  CriterionVerdicts check_all(const ReviewInstance& instance,
                              const NormalizedInput& input) const;
  /// check_all followed by aggregate.
  ClarityVerdict evaluate(const ReviewInstance& instance,
                          const NormalizedInput& input) const;

  const HeuristicConfig& config() const { return config_; }
  const Lexicons& lexicons() const { return *lexicons_; }

 private:
  struct Context;
  Context analyze(const NormalizedInput& input) const;
  bool check(CriterionId id, const Context& ctx) const;

  bool relevant_to_change(const Context& ctx) const;
  bool specifies_location(const Context& ctx) const;
  bool clear_intention(const Context& ctx) const;
  bool provides_reason(const Context& ctx) const;
  bool suggests_next_step(const Context& ctx) const;
  bool provides_reference(const Context& ctx) const;
  bool concise(const Context& ctx) const;
  bool polite(const Context& ctx) const;
  bool readable_format(const Context& ctx) const;
  bool proper_grammar(const Context& ctx) const;

  bool is_dictionary_word(std::string_view lower_word) const;

  HeuristicConfig config_;
  std::shared_ptr<const Lexicons> lexicons_;
  std::regex line_ref_;
  std::regex url_;
  std::regex issue_ref_;
  std::regex tracker_ref_;
};

/// Convenience wrapper over a default-configured HeuristicChecker.
bool check(CriterionId id, const ReviewInstance& instance, const NormalizedInput& input);

}  // namespace crc
