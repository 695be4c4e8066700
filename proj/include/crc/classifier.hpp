#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "crc/common.hpp"
#include "crc/features.hpp"
#include "crc/forest.hpp"

namespace crc {

struct ClassifierParams {
  FeatureConfig features;
  ForestParams forest;
  HeuristicConfig heuristics;  // only used for checker features
  MarkerMode marker_mode = MarkerMode::Lenient;
};

struct Prediction {
  bool label = false;
  double score = 0.0;  // mean positive-leaf probability
};

/// One binary random forest for a single attribute.
class ForestClassifier {
 public:
  static constexpr int kFormatVersion = 1;

  /// Features are fitted on `train` only. Instances are processed in id order
  /// so input order does not affect the model. Throws ValidationError on
  /// unlabeled instances or a single-class training set.
  static ForestClassifier train(const Corpus& train, Attribute attribute, const ClassifierParams& params);

  Prediction predict(const NormalizedInput& input) const;
  Prediction predict(const ReviewInstance& instance) const;
  std::vector<Prediction> predict(const std::vector<ReviewInstance>& instances) const;

  Attribute attribute() const { return attribute_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const RandomForest<Vocabulary::Scalar>& forest() const { return forest_; }
  MarkerMode marker_mode() const { return marker_mode_; }

  nlohmann::json to_json() const;
  static ForestClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  /// Throws LoadError if the file is missing or malformed.
  static ForestClassifier load(const std::filesystem::path& path);

 private:
  ForestClassifier(Attribute attribute, Vocabulary vocabulary, RandomForest<Vocabulary::Scalar> forest,
                   MarkerMode mode)
      : attribute_(attribute), vocabulary_(std::move(vocabulary)), forest_(std::move(forest)),
        marker_mode_(mode) {}

  Attribute attribute_;
  Vocabulary vocabulary_;
  RandomForest<Vocabulary::Scalar> forest_;
  MarkerMode marker_mode_;
};

}  // namespace crc
