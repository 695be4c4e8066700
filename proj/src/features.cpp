#include "crc/features.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <unordered_set>

namespace crc {
namespace {

const std::vector<std::string>& base_engineered() {
  static const std::vector<std::string> names = {"eng:comment_length", "eng:question_mark",
                                                 "eng:url", "eng:code_overlap"};
  return names;
}

bool is_marker(const std::string& t) { return t == kDeleteToken || t == kAddToken || t == kSepToken; }

bool has_url(const std::string& text) {
  static const std::regex url(R"((https?://\S+)|(\bwww\.\S+))", std::regex::icase);
  return std::regex_search(text, url);
}

// Distinct comment tokens (two characters or longer) that also occur in the changed lines.
std::size_t code_overlap(const NormalizedInput& input) {
  std::unordered_set<std::string> diff;
  for (auto& t : tokenize(input.normalized_diff)) {
    if (!is_marker(t)) diff.insert(std::move(t));
  }
  std::set<std::string> shared;
  for (auto& t : tokenize(input.comment)) {
    if (t.size() >= 2 && diff.contains(t)) shared.insert(std::move(t));
  }
  return shared.size();
}

}  // namespace

std::vector<std::string> token_terms(const NormalizedInput& input, bool bigrams) {
  const auto tokens = tokenize(input.fused_text);
  std::vector<std::string> terms;
  terms.reserve(tokens.size() * 2);
  for (const auto& t : tokens) terms.push_back("w:" + t);
  if (bigrams) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) terms.push_back("b:" + tokens[i] + " " + tokens[i + 1]);
  }
  return terms;
}

Vocabulary::Vocabulary(FeatureConfig config, HeuristicConfig heuristics, std::vector<std::string> tokens)
    : config_(config), heuristics_(heuristics), checker_(heuristics) {
  names_ = base_engineered();
  if (config_.checker_features) {
    for (auto id : kCriteria) names_.push_back("chk:" + std::string(to_string(id)));
  }
  engineered_ = names_.size();
  names_.insert(names_.end(), std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
  for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
}

Vocabulary Vocabulary::fit(const std::vector<NormalizedInput>& train, const FeatureConfig& config,
                           const HeuristicConfig& heuristics) {
  if (train.empty()) throw ArgumentError("cannot fit features on an empty training set");
  std::map<std::string, std::size_t> df;
  for (const auto& input : train) {
    auto terms = token_terms(input, config.bigrams);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto& t : terms) ++df[std::move(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, count] : df) {
    if (count >= config.min_frequency) kept.emplace_back(term, count);
  }
  if (kept.size() > config.max_vocabulary) {
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    kept.resize(config.max_vocabulary);
    std::sort(kept.begin(), kept.end());
  }
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [term, count] : kept) tokens.push_back(std::move(term));
  return Vocabulary(config, heuristics, std::move(tokens));
}

std::optional<std::size_t> Vocabulary::index(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocabulary::dense_columns() const {
  std::vector<int> out(engineered_);
  for (std::size_t i = 0; i < engineered_; ++i) out[i] = static_cast<int>(i);
  return out;
}

void Vocabulary::fill(const NormalizedInput& input, Eigen::Ref<FeatureRow<Scalar>> row) const {
  row.setZero();
  row(0) = static_cast<Scalar>(tokenize(input.comment).size());
  row(1) = input.comment.find('?') != std::string::npos ? 1 : 0;
  row(2) = has_url(input.comment) ? 1 : 0;
  row(3) = static_cast<Scalar>(code_overlap(input));
  if (config_.checker_features) {
    static const ReviewInstance unused;
    const auto verdicts = checker_.check_all(unused, input);
    Eigen::Index c = static_cast<Eigen::Index>(base_engineered().size());
    for (auto id : kCriteria) row(c++) = verdicts.at(id) ? 1 : 0;
  }
  for (const auto& term : token_terms(input, config_.bigrams)) {
    if (const auto it = index_.find(term); it != index_.end()) row(static_cast<Eigen::Index>(it->second)) += 1;
  }
}

FeatureRow<Vocabulary::Scalar> Vocabulary::extract(const NormalizedInput& input) const {
  FeatureRow<Scalar> row(static_cast<Eigen::Index>(size()));
  fill(input, row);
  return row;
}

FeatureMatrix<Vocabulary::Scalar> Vocabulary::extract(const std::vector<NormalizedInput>& inputs) const {
  FeatureMatrix<Scalar> x(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) fill(inputs[i], x.row(static_cast<Eigen::Index>(i)));
  return x;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"config", config_},
          {"heuristics", heuristics_},
          {"tokens", std::vector<std::string>(names_.begin() + static_cast<std::ptrdiff_t>(engineered_), names_.end())}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  try {
    return Vocabulary(j.at("config").get<FeatureConfig>(), j.at("heuristics").get<HeuristicConfig>(),
                      j.at("tokens").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed vocabulary: ") + e.what());
  }
}

}  // namespace crc
