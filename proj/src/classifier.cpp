#include "crc/classifier.hpp"

#include <algorithm>
#include <fstream>

namespace crc {

ForestClassifier ForestClassifier::train(const Corpus& train, Attribute attribute,
                                         const ClassifierParams& params) {
  if (train.instances.empty()) throw ArgumentError("cannot train on an empty corpus");
  std::vector<const ReviewInstance*> ordered;
  for (const auto& inst : train.instances) {
    if (!inst.labeled_for(attribute)) {
      throw ValidationError("instance " + inst.id + " has no " + std::string(to_string(attribute)) + " label");
    }
    ordered.push_back(&inst);
  }
  // Stable by id: up-sampled copies keep their relative order.
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<NormalizedInput> inputs;
  LabelVector y(static_cast<Eigen::Index>(ordered.size()));
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    inputs.push_back(preprocess(*ordered[i], params.marker_mode));
    y(static_cast<Eigen::Index>(i)) = ordered[i]->label(attribute);
  }
  auto vocabulary = Vocabulary::fit(inputs, params.features, params.heuristics);
  const auto x = vocabulary.extract(inputs);
  auto forest = RandomForest<Vocabulary::Scalar>::fit(x, y, params.forest, vocabulary.dense_columns());
  return ForestClassifier(attribute, std::move(vocabulary), std::move(forest), params.marker_mode);
}

Prediction ForestClassifier::predict(const NormalizedInput& input) const {
  const double score = forest_.score(vocabulary_.extract(input));
  return {score >= 0.5, score};
}

Prediction ForestClassifier::predict(const ReviewInstance& instance) const {
  return predict(preprocess(instance, marker_mode_));
}

std::vector<Prediction> ForestClassifier::predict(const std::vector<ReviewInstance>& instances) const {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(predict(inst));
  return out;
}

nlohmann::json ForestClassifier::to_json() const {
  return {{"format", "crc-forest-classifier"},
          {"version", kFormatVersion},
          {"attribute", to_string(attribute_)},
          {"marker_mode", marker_mode_ == MarkerMode::Strict ? "strict" : "lenient"},
          {"vocabulary", vocabulary_.to_json()},
          {"forest", forest_.to_json()}};
}

ForestClassifier ForestClassifier::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "crc-forest-classifier") throw LoadError("not a classifier model file");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw LoadError("unsupported model version " + j.at("version").dump());
    }
    auto vocabulary = Vocabulary::from_json(j.at("vocabulary"));
    auto forest = RandomForest<Vocabulary::Scalar>::from_json(j.at("forest"));
    if (forest.feature_count() != vocabulary.size()) {
      throw LoadError("model vocabulary does not match its forest");
    }
    const auto mode = j.at("marker_mode") == "strict" ? MarkerMode::Strict : MarkerMode::Lenient;
    return ForestClassifier(parse_attribute(j.at("attribute").get<std::string>()), std::move(vocabulary),
                            std::move(forest), mode);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed model: ") + e.what());
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("malformed model: ") + e.what());
  }
}

void ForestClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw Error("failed writing model " + path.string());
}

ForestClassifier ForestClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed model " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace crc
