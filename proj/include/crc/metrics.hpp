#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace crc {

/// Positive = meets the evaluation criteria.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// nullopt means Undefined (a zero denominator).
using Metric = std::optional<double>;

struct MetricSet {
  Metric balanced_accuracy;
  Metric precision;
  Metric recall;
  Metric f1;
};

struct PrecisionRecallF1 {
  Metric precision;
  Metric recall;
  Metric f1;
};

/// Throws ArgumentError on empty input or length mismatch.
Confusion confusion(const std::vector<bool>& predictions, const std::vector<bool>& labels);

/// (TPR + TNR) / 2; Undefined when either class is absent from the labels.
Metric balanced_accuracy(const Confusion& c);
PrecisionRecallF1 precision_recall_f1(const Confusion& c);
MetricSet metrics(const Confusion& c);

/// Cohen's kappa for two boolean annotations. Returns 1.0 when chance
/// agreement and observed agreement are both 1.
double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

}  // namespace crc
