#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crc/classifier.hpp"
#include "crc/common.hpp"
#include "crc/corpus.hpp"
#include "crc/criteria.hpp"
#include "crc/llm_eval.hpp"
#include "crc/metrics.hpp"

namespace crc {

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

/// A model fitted for one attribute on one training slice.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<bool> predict(const std::vector<ReviewInstance>& instances) = 0;
  /// Instances among the last predict() call that received a fallback verdict.
  virtual std::size_t fallbacks() const { return 0; }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// Report grouping, e.g. "rule-based" or "feature-based".
  virtual std::string group() const = 0;
  /// Called once with the full corpus before any fit.
  virtual void prepare(const Corpus&) {}
  /// Must be safe to call concurrently.
  virtual std::unique_ptr<Predictor> fit(const Corpus& train, const Corpus& validation, Attribute attribute,
                                         std::uint64_t seed) const = 0;
};

/// Criterion checkers plus aggregation; ignores training data.
class HeuristicBackend : public Backend {
 public:
  explicit HeuristicBackend(std::shared_ptr<const HeuristicChecker> checker = std::make_shared<HeuristicChecker>(),
                            MarkerMode mode = MarkerMode::Lenient);
  std::string name() const override { return "heuristic"; }
  std::string group() const override { return "rule-based"; }
  std::unique_ptr<Predictor> fit(const Corpus&, const Corpus&, Attribute attribute,
                                 std::uint64_t) const override;

 private:
  std::shared_ptr<const HeuristicChecker> checker_;
  MarkerMode mode_;
};

class ForestBackend : public Backend {
 public:
  explicit ForestBackend(ClassifierParams params = {}) : params_(params) {}
  std::string name() const override { return "forest"; }
  std::string group() const override { return "feature-based"; }
  /// The forest seed is derived from `seed` and the attribute.
  std::unique_ptr<Predictor> fit(const Corpus& train, const Corpus& validation, Attribute attribute,
                                 std::uint64_t seed) const override;

 private:
  ClassifierParams params_;
};

/// Remote LLM judge. prepare() queries every instance once; folds and
/// attributes then read the cached verdicts.
class LlmBackend : public Backend {
 public:
  LlmBackend(std::shared_ptr<ChatTransport> transport, LlmOptions options = {},
             std::ostream* transcript = nullptr);
  std::string name() const override { return "llm"; }
  std::string group() const override { return "llm"; }
  void prepare(const Corpus& corpus) override;
  std::unique_ptr<Predictor> fit(const Corpus&, const Corpus&, Attribute attribute,
                                 std::uint64_t) const override;
  std::size_t total_fallbacks() const;

 private:
  friend class LlmPredictor;
  std::shared_ptr<ChatTransport> transport_;
  LlmOptions options_;
  std::ostream* transcript_;
  mutable std::mutex mu_;
  mutable std::map<std::string, LlmVerdict> cache_;
};

struct AdapterHyperparameters {
  int epochs = 10;
  int early_stopping_patience = 3;
  int batch_size = 16;
  double learning_rate = 2e-5;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AdapterHyperparameters, epochs, early_stopping_patience,
                                                batch_size, learning_rate)

/// External model served over line-delimited JSON on a child process's
/// stdin/stdout. One process per fitted predictor.
class AdapterBackend : public Backend {
 public:
  AdapterBackend(std::vector<std::string> command, std::filesystem::path model_root,
                 AdapterHyperparameters hyper = {}, std::string name = "adapter");
  std::string name() const override { return name_; }
  std::string group() const override { return "pre-trained"; }
  std::unique_ptr<Predictor> fit(const Corpus& train, const Corpus& validation, Attribute attribute,
                                 std::uint64_t seed) const override;

 private:
  std::vector<std::string> command_;
  std::filesystem::path model_root_;
  AdapterHyperparameters hyper_;
  std::string name_;
};

/// Line-oriented child process used by AdapterBackend.
class AdapterProcess {
 public:
  explicit AdapterProcess(const std::vector<std::string>& command);
  ~AdapterProcess();
  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  /// Sends one request line and reads one response line. Throws
  /// BackendError on I/O failure, malformed JSON or an "error" field.
  nlohmann::json request(const nlohmann::json& message);
  /// Sends {"op":"shutdown"} and waits; returns the exit status.
  int shutdown();

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Adapter instance record: {id, fused_text[, label]}.
nlohmann::json adapter_instances(const std::vector<ReviewInstance>& instances, std::optional<Attribute> labels);

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct FoldRound {
  Corpus train;  // up-sampled when requested
  Corpus validation;
  Corpus test;
  std::size_t upsampled = 0;
  bool upsample_skipped = false;  // negatives outnumbered positives
};

/// Builds the slices for one round and checks that no test id reaches the
/// training or validation slice; throws std::logic_error if one does.
FoldRound make_round(const Corpus& corpus, const FoldPlan& plan, int fold, Attribute attribute, bool upsample,
                     std::uint64_t seed);

struct FoldResult {
  int fold = 0;
  bool failed = false;
  std::string error;
  Confusion confusion;
  MetricSet metrics;
  std::size_t train_size = 0;
  std::size_t upsampled = 0;
  bool upsample_skipped = false;
  std::size_t validation_size = 0;
  std::size_t fallbacks = 0;
};

struct MetricAverage {
  MetricSet macro;  // mean over folds where defined
  std::map<std::string, std::size_t> excluded;  // per metric: Undefined or failed folds
  Confusion pooled_confusion;
  MetricSet pooled;
};

struct AttributeResult {
  Attribute attribute;
  std::string fold_plan_hash;
  std::vector<FoldResult> folds;
  MetricAverage average;
  std::size_t failed_folds = 0;
  std::size_t fallbacks = 0;
};

struct BackendResult {
  std::string name;
  std::string group;
  std::vector<AttributeResult> attributes;
  MetricSet attribute_average;  // macro averages averaged over attributes
};

struct CvOptions {
  int k = 5;
  std::uint64_t seed = 0;
  bool upsample = true;
  bool stratify = false;
  std::size_t jobs = 1;
  std::vector<Attribute> attributes{kAttributes.begin(), kAttributes.end()};
};

struct EvalReport {
  nlohmann::json run_config = nlohmann::json::object();
  int k = 5;
  std::uint64_t seed = 0;
  std::size_t corpus_size = 0;
  /// Per attribute; equal for all attributes unless folds are stratified.
  std::map<Attribute, std::string> fold_plan_hashes;
  std::vector<BackendResult> backends;

  /// The single plan hash, or a combined hash when plans differ per attribute.
  std::string fold_plan_hash() const;
  nlohmann::json to_json() const;
  /// Inverse of to_json. Throws LoadError.
  static EvalReport from_json(const nlohmann::json& j);
};

/// Fold plans used by cross_validate: one shared plan, or one per attribute
/// when stratified.
std::map<Attribute, FoldPlan> plan_folds(const Corpus& corpus, const CvOptions& options);

/// Runs every backend on the same fold plans. A backend exception marks that
/// fold failed; the run continues.
EvalReport cross_validate(const std::vector<Backend*>& backends, const Corpus& corpus, const CvOptions& options);
EvalReport cross_validate(const std::vector<Backend*>& backends, const Corpus& corpus, const CvOptions& options,
                          const std::map<Attribute, FoldPlan>& plans);

MetricAverage average_folds(const std::vector<FoldResult>& folds);

/// Percentage with two decimals, "n/a" for Undefined.
std::string format_percent(const Metric& m);
std::string render_markdown(const EvalReport& report);
std::string render_csv(const EvalReport& report);

}  // namespace crc
