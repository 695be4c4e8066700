#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crc/common.hpp"

namespace crc {

// ---------------------------------------------------------------------------
// JSONL corpus I/O
// ---------------------------------------------------------------------------

/// Parses one corpus record. `line` is used only for error messages.
ReviewInstance parse_instance(const nlohmann::json& record, std::size_t line);
nlohmann::json to_json(const ReviewInstance& instance);

/// Reads one JSON object per line. Blank lines are skipped. Throws LoadError
/// naming the line and field for malformed records, ValidationError for
/// duplicate ids.
Corpus load_corpus(const std::filesystem::path& path);
Corpus read_corpus(std::istream& in, std::string source);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

/// Checks id uniqueness and non-empty fields.
void validate_corpus(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct SamplePlan {
  std::size_t population = 0;
  double confidence = 0.95;
  double margin = 0.05;
  std::size_t sample_size = 0;
};

/// Two-sided standard normal quantile for a confidence level, e.g.
/// 0.95 -> 1.959964.
double normal_quantile_two_sided(double confidence);

/// Cochran's sample size with p = 0.5 and finite-population correction,
/// rounded up and capped at the population.
std::size_t required_sample_size(std::size_t population, double confidence,
                                 double margin);
SamplePlan plan_sample(std::size_t population, double confidence, double margin);

/// Per-language uniform sampling without replacement. Output keeps the input
/// order of the retained instances.
Corpus stratified_sample(const Corpus& corpus, double confidence, double margin,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::map<std::string, int> assignment;

  std::vector<std::string> fold_ids(int fold) const;  // sorted
  std::vector<std::size_t> fold_sizes() const;

  /// The held-out fold split into validation and test halves. Validation
  /// receives floor(n/2) ids, test the rest. The split is a function of the
  /// plan contents only.
  struct HeldOut {
    std::vector<std::string> validation;
    std::vector<std::string> test;
  };
  HeldOut held_out(int fold) const;

  nlohmann::json to_json() const;
  static FoldPlan from_json(const nlohmann::json& j);
  /// 16 hex digits of FNV-1a over the canonical JSON serialization.
  std::string hash() const;
};

void save_fold_plan(const FoldPlan& plan, const std::filesystem::path& path);
FoldPlan load_fold_plan(const std::filesystem::path& path);

/// Seeded shuffle of the sorted ids, dealt round-robin into k folds. With
/// `stratify_on`, instances are dealt class by class so each fold receives a
/// near-equal share of negatives for that attribute.
FoldPlan make_folds(const Corpus& corpus, int k, std::uint64_t seed,
                    std::optional<Attribute> stratify_on = std::nullopt);

// ---------------------------------------------------------------------------
// Augmentation and statistics
// ---------------------------------------------------------------------------

/// Appends copies of negatives (drawn uniformly with replacement) until the
/// negative count equals the positive count. Zero negatives returns the input
/// unchanged. Throws ArgumentError when an instance lacks the label or when
/// negatives outnumber positives.
Corpus upsample_negatives(const Corpus& train, Attribute attribute,
                          std::uint64_t seed);

struct DistributionRow {
  std::string group;  // language name or "Overall"
  std::size_t count = 0;
  std::map<Attribute, double> negative_pct;
  double all_positive_pct = 0.0;
};

struct LabelDistribution {
  std::vector<DistributionRow> languages;  // languages present, enum order
  DistributionRow overall;
};

/// Requires attribute-level labels on every instance; throws ValidationError
/// listing the offending ids otherwise.
LabelDistribution label_distribution(const Corpus& corpus);

/// Round-half-up to `decimals` places.
double round_half_up(double value, int decimals);

}  // namespace crc
