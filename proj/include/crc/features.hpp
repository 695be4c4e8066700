#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "crc/criteria.hpp"
#include "crc/forest.hpp"
#include "crc/preprocess.hpp"

namespace crc {

struct FeatureConfig {
  std::size_t min_frequency = 2;  // document frequency
  bool bigrams = true;
  bool checker_features = true;
  std::size_t max_vocabulary = 5000;  // token features only
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FeatureConfig, min_frequency, bigrams,
                                                checker_features, max_vocabulary)

/// Fitted feature space. Engineered features come first (comment length,
/// question mark, URL, code overlap, then one column per criterion checker
/// when enabled), followed by token unigrams "w:<tok>" and bigrams
/// "b:<tok> <tok>" in lexical order.
class Vocabulary {
 public:
  using Scalar = float;

  /// Throws ArgumentError on empty input.
  static Vocabulary fit(const std::vector<NormalizedInput>& train, const FeatureConfig& config,
                        const HeuristicConfig& heuristics = {});

  std::size_t size() const { return names_.size(); }
  std::size_t engineered_count() const { return engineered_; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index(const std::string& name) const;
  const FeatureConfig& config() const { return config_; }

  /// Columns that are non-zero on most rows (the engineered block).
  std::vector<int> dense_columns() const;

  FeatureRow<Scalar> extract(const NormalizedInput& input) const;
  FeatureMatrix<Scalar> extract(const std::vector<NormalizedInput>& inputs) const;

  nlohmann::json to_json() const;
  /// Throws LoadError on malformed input.
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  Vocabulary(FeatureConfig config, HeuristicConfig heuristics, std::vector<std::string> tokens);
  void fill(const NormalizedInput& input, Eigen::Ref<FeatureRow<Scalar>> row) const;

  FeatureConfig config_;
  HeuristicConfig heuristics_;
  HeuristicChecker checker_;
  std::size_t engineered_ = 0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Unigram and (optionally) bigram terms of the fused text, with repeats.
std::vector<std::string> token_terms(const NormalizedInput& input, bool bigrams);

}  // namespace crc
