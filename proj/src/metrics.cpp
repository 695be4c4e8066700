#include "crc/metrics.hpp"

#include <string>

#include "crc/common.hpp"

namespace crc {
namespace {

Metric ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Confusion confusion(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) {
    throw ArgumentError("length mismatch: " + std::to_string(predictions.size()) +
                        " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ArgumentError("cannot score an empty prediction list");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i]) {
      (labels[i] ? c.tp : c.fp)++;
    } else {
      (labels[i] ? c.fn : c.tn)++;
    }
  }
  return c;
}

Metric balanced_accuracy(const Confusion& c) {
  const auto tpr = ratio(c.tp, c.tp + c.fn);
  const auto tnr = ratio(c.tn, c.tn + c.fp);
  if (!tpr || !tnr) return std::nullopt;
  return (*tpr + *tnr) / 2.0;
}

PrecisionRecallF1 precision_recall_f1(const Confusion& c) {
  PrecisionRecallF1 out;
  out.precision = ratio(c.tp, c.tp + c.fp);
  out.recall = ratio(c.tp, c.tp + c.fn);
  if (out.precision && out.recall && (*out.precision + *out.recall) > 0.0) {
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  }
  return out;
}

MetricSet metrics(const Confusion& c) {
  const auto prf = precision_recall_f1(c);
  return {balanced_accuracy(c), prf.precision, prf.recall, prf.f1};
}

double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw ArgumentError("kappa: annotation lengths differ");
  if (a.empty()) throw ArgumentError("kappa: empty annotations");
  // Integer form: kappa = (n * agree - S) / (n^2 - S), S = sum of marginal
  // products, so the single division is the only rounding step.
  long long a_true = 0, b_true = 0, agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a_true += a[i];
    b_true += b[i];
    agree += a[i] == b[i];
  }
  const long long n = static_cast<long long>(a.size());
  const long long chance = a_true * b_true + (n - a_true) * (n - b_true);
  const long long den = n * n - chance;
  if (den == 0) return 1.0;  // p_e = 1 implies p_o = 1
  return static_cast<double>(n * agree - chance) / static_cast<double>(den);
}

}  // namespace crc
