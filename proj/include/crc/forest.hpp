#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "crc/common.hpp"
#include "crc/rng.hpp"

namespace crc {

template <typename Scalar>
using FeatureMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using FeatureRow = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using LabelVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 2;
  // Features tried per split as a fraction of the feature count; 0 selects
  // sqrt(feature count).
  double feature_fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency

  std::size_t features_per_split(std::size_t n_features) const {
    const double raw = feature_fraction > 0.0
                           ? feature_fraction * static_cast<double>(n_features)
                           : std::sqrt(static_cast<double>(n_features));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(raw)), 1,
                                   std::max<std::size_t>(n_features, 1));
  }
};

inline void to_json(nlohmann::json& j, const ForestParams& p) {
  j = {{"trees", p.trees},         {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf},
       {"feature_fraction", p.feature_fraction}, {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, ForestParams& p) {
  p.trees = j.at("trees").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.min_leaf = j.at("min_leaf").get<std::size_t>();
  p.feature_fraction = j.at("feature_fraction").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
}

/// Axis-aligned binary tree; leaves hold the positive-class probability.
template <typename Scalar>
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    Scalar threshold = 0;
    int left = -1;  // value <= threshold
    int right = -1;
    double positive = 0.0;
  };
  std::vector<Node> nodes;

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].positive;
  }

  std::size_t depth() const { return depth_from(0); }

 private:
  std::size_t depth_from(int i) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

namespace detail {

// Nonzero structure of a training matrix, shared by all trees.
template <typename Scalar>
struct SparseIndex {
  std::vector<std::vector<std::pair<int, Scalar>>> columns;  // (row, value), rows ascending
  std::vector<std::vector<int>> row_sparse;  // per row, non-dense columns with a nonzero value
  std::vector<int> dense;

  SparseIndex(const FeatureMatrix<Scalar>& x, std::vector<int> dense_features)
      : columns(static_cast<std::size_t>(x.cols())), row_sparse(static_cast<std::size_t>(x.rows())),
        dense(std::move(dense_features)) {
    std::sort(dense.begin(), dense.end());
    dense.erase(std::unique(dense.begin(), dense.end()), dense.end());
    std::vector<bool> is_dense(static_cast<std::size_t>(x.cols()), false);
    for (int f : dense) is_dense.at(static_cast<std::size_t>(f)) = true;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const Scalar v = x(r, c);
        if (v == Scalar(0)) continue;
        columns[static_cast<std::size_t>(c)].emplace_back(static_cast<int>(r), v);
        if (!is_dense[static_cast<std::size_t>(c)]) row_sparse[static_cast<std::size_t>(r)].push_back(static_cast<int>(c));
      }
    }
  }
};

// Grows one CART tree (Gini impurity) on a bootstrap sample. Candidate
// features at a node are drawn uniformly among the features that are not
// constant on the node, until `mtry` non-constant features were evaluated.
// Zero-valued rows of a feature are handled as one block, so the cost of a
// candidate is bounded by its nonzero count or the node size, whichever is
// smaller.
template <typename Scalar>
class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix<Scalar>& x, const LabelVector& y, const SparseIndex<Scalar>& index,
             const ForestParams& params, Rng rng)
      : x_(x), y_(y), index_(index), params_(params), rng_(rng),
        mtry_(params.features_per_split(static_cast<std::size_t>(x.cols()))),
        seen_(static_cast<std::size_t>(x.cols()), 0), in_node_(static_cast<std::size_t>(x.rows()), 0) {}

  DecisionTree<Scalar> grow() {
    const auto n = static_cast<std::size_t>(x_.rows());
    std::vector<int> weight(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++weight[rng_.below(n)];
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight[i] > 0) samples.push_back({static_cast<int>(i), weight[i]});
    }
    tree_.nodes.clear();
    build(samples, 0);
    return std::move(tree_);
  }

 private:
  struct Sample {
    int row;
    int weight;
  };
  struct Entry {
    Scalar value;
    double weight;
    double positive;
  };
  struct Split {
    int feature = -1;
    Scalar threshold = 0;
    double impurity = 0.0;
  };

  static double gini_sum(double w, double pos) {
    if (w <= 0.0) return 0.0;
    const double p = pos / w;
    return w * 2.0 * p * (1.0 - p);
  }

  int build(std::vector<Sample>& samples, std::size_t depth) {
    double w = 0.0, pos = 0.0;
    for (const auto& s : samples) {
      w += s.weight;
      pos += y_(s.row) ? s.weight : 0;
    }
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().positive = w > 0.0 ? pos / w : 0.0;

    const bool pure = pos == 0.0 || pos == w;
    const bool too_deep = params_.max_depth > 0 && depth >= params_.max_depth;
    if (pure || too_deep || w < 2.0 * static_cast<double>(params_.min_leaf)) return index;

    const auto split = best_split(samples, w, pos);
    if (split.feature < 0) return index;

    std::vector<Sample> left, right;
    for (const auto& s : samples) {
      (x_(s.row, split.feature) <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  std::vector<int> candidate_features(const std::vector<Sample>& samples) {
    std::vector<int> out = index_.dense;
    ++stamp_;
    for (int f : index_.dense) seen_[static_cast<std::size_t>(f)] = stamp_;
    for (const auto& s : samples) {
      for (int f : index_.row_sparse[static_cast<std::size_t>(s.row)]) {
        if (seen_[static_cast<std::size_t>(f)] != stamp_) {
          seen_[static_cast<std::size_t>(f)] = stamp_;
          out.push_back(f);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Nonzero entries of feature f on the node, plus one aggregated zero entry.
  void gather(int f, const std::vector<Sample>& samples, double w, double pos, std::vector<Entry>& out) const {
    out.clear();
    double nz_w = 0.0, nz_pos = 0.0;
    auto add = [&](Scalar v, int row, int weight) {
      const double p = y_(row) ? weight : 0;
      out.push_back({v, static_cast<double>(weight), p});
      nz_w += weight;
      nz_pos += p;
    };
    const auto& column = index_.columns[static_cast<std::size_t>(f)];
    if (samples.size() < column.size()) {
      for (const auto& s : samples) {
        const Scalar v = x_(s.row, f);
        if (v != Scalar(0)) add(v, s.row, s.weight);
      }
    } else {
      for (const auto& [row, v] : column) {
        if (const int weight = in_node_[static_cast<std::size_t>(row)]) add(v, row, weight);
      }
    }
    if (w - nz_w > 0.0) out.push_back({Scalar(0), w - nz_w, pos - nz_pos});
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
  }

  Split best_split(const std::vector<Sample>& samples, double w, double pos) {
    for (const auto& s : samples) in_node_[static_cast<std::size_t>(s.row)] = s.weight;
    const double parent = gini_sum(w, pos);
    Split best;
    best.impurity = parent - 1e-12;
    auto candidates = candidate_features(samples);
    std::size_t evaluated = 0;
    const double min_leaf = static_cast<double>(params_.min_leaf);
    for (std::size_t i = 0; i < candidates.size() && evaluated < mtry_; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
      const int f = candidates[i];
      gather(f, samples, w, pos, entries_);
      if (entries_.front().value == entries_.back().value) continue;
      ++evaluated;
      double lw = 0.0, lpos = 0.0;
      for (std::size_t k = 0; k + 1 < entries_.size(); ++k) {
        lw += entries_[k].weight;
        lpos += entries_[k].positive;
        if (entries_[k].value == entries_[k + 1].value) continue;
        if (lw < min_leaf || w - lw < min_leaf) continue;
        const double impurity = gini_sum(lw, lpos) + gini_sum(w - lw, pos - lpos);
        if (impurity < best.impurity) {
          best.impurity = impurity;
          best.feature = f;
          // Midpoint; falls back to the lower value if the midpoint rounds up.
          const Scalar lo = entries_[k].value, hi = entries_[k + 1].value;
          Scalar mid = lo + (hi - lo) / Scalar(2);
          if (!(mid < hi)) mid = lo;
          best.threshold = mid;
        }
      }
    }
    for (const auto& s : samples) in_node_[static_cast<std::size_t>(s.row)] = 0;
    return best;
  }

  const FeatureMatrix<Scalar>& x_;
  const LabelVector& y_;
  const SparseIndex<Scalar>& index_;
  const ForestParams& params_;
  Rng rng_;
  std::size_t mtry_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t stamp_ = 0;
  std::vector<int> in_node_;
  std::vector<Entry> entries_;
  DecisionTree<Scalar> tree_;
};

}  // namespace detail

/// Bagged CART trees with per-split feature subsampling. Tree t draws from
/// the stream (seed, t), so results do not depend on the thread count.
template <typename Scalar>
class RandomForest {
 public:
  RandomForest() = default;

  /// `dense_features` lists columns that are non-zero on most rows; all
  /// other columns are treated as sparse when collecting split candidates.
  /// Throws ValidationError("degenerate labels") on single-class input.
  static RandomForest fit(const FeatureMatrix<Scalar>& x, const LabelVector& y,
                          const ForestParams& params, std::vector<int> dense_features = {}) {
    if (x.rows() == 0 || x.rows() != y.size()) {
      throw ArgumentError("forest: feature rows and labels must be non-empty and aligned");
    }
    if (y.all() || !y.any()) throw ValidationError("degenerate labels: training set has a single class");
    if (params.trees == 0) throw ArgumentError("forest: tree count must be positive");

    for (int f : dense_features) {
      if (f < 0 || f >= x.cols()) throw ArgumentError("forest: dense feature index out of range");
    }
    const detail::SparseIndex<Scalar> index(x, std::move(dense_features));

    RandomForest forest;
    forest.params_ = params;
    forest.n_features_ = static_cast<std::size_t>(x.cols());
    forest.trees_.resize(params.trees);
    const Rng root(params.seed, fnv1a64("random_forest"));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (auto t = next++; t < params.trees; t = next++) {
        detail::TreeGrower<Scalar> grower(x, y, index, params, root.split(t));
        forest.trees_[t] = grower.grow();
      }
    };
    const auto threads = std::min<std::size_t>(
        params.trees, params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    return forest;
  }

  /// Mean positive-leaf probability over trees, in [0, 1].
  template <typename Derived>
  double score(const Eigen::MatrixBase<Derived>& x) const {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size());
  }

  Eigen::VectorXd scores(const FeatureMatrix<Scalar>& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = score(x.row(r));
    return out;
  }

  LabelVector predict(const FeatureMatrix<Scalar>& x) const { return scores(x).array() >= 0.5; }

  const ForestParams& params() const { return params_; }
  const std::vector<DecisionTree<Scalar>>& trees() const { return trees_; }
  std::size_t feature_count() const { return n_features_; }

  nlohmann::json to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) {
      nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                     left = nlohmann::json::array(), right = nlohmann::json::array(),
                     positive = nlohmann::json::array();
      for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(static_cast<double>(n.threshold));
        left.push_back(n.left);
        right.push_back(n.right);
        positive.push_back(n.positive);
      }
      trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                       {"right", right}, {"positive", positive}});
    }
    return {{"params", params_}, {"n_features", n_features_}, {"trees", std::move(trees)}};
  }

  static RandomForest from_json(const nlohmann::json& j) {
    RandomForest forest;
    forest.params_ = j.at("params").get<ForestParams>();
    forest.n_features_ = j.at("n_features").get<std::size_t>();
    for (const auto& t : j.at("trees")) {
      DecisionTree<Scalar> tree;
      const auto& feature = t.at("feature");
      tree.nodes.resize(feature.size());
      for (std::size_t i = 0; i < feature.size(); ++i) {
        auto& n = tree.nodes[i];
        n.feature = feature[i].get<int>();
        n.threshold = static_cast<Scalar>(t.at("threshold")[i].get<double>());
        n.left = t.at("left")[i].get<int>();
        n.right = t.at("right")[i].get<int>();
        n.positive = t.at("positive")[i].get<double>();
        const auto limit = static_cast<int>(feature.size());
        if (n.feature >= static_cast<int>(forest.n_features_) ||
            (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= limit || n.right >= limit))) {
          throw LoadError("forest: malformed tree node");
        }
      }
      if (tree.nodes.empty()) throw LoadError("forest: empty tree");
      forest.trees_.push_back(std::move(tree));
    }
    return forest;
  }

 private:
  ForestParams params_;
  std::size_t n_features_ = 0;
  std::vector<DecisionTree<Scalar>> trees_;
};

}  // namespace crc
