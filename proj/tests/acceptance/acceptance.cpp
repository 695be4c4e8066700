// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Every expectation is recomputed here from first principles rather
// than taken from the library under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "crc/corpus.hpp"
#include "crc/criteria.hpp"
#include "crc/eval.hpp"
#include "crc/forest.hpp"
#include "crc/llm_eval.hpp"
#include "crc/metrics.hpp"
#include "crc/preprocess.hpp"
#include "crc/rng.hpp"

namespace fs = std::filesystem;
using namespace crc;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects failures without stopping at the first one.
class Check {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond && failures_.size() < 5) failures_.push_back(what);
    ok_ = ok_ && cond;
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }
  Outcome outcome() const {
    Outcome o{ok_, {}};
    const auto& lines = ok_ ? notes_ : failures_;
    for (std::size_t i = 0; i < lines.size(); ++i) o.detail += (i ? "; " : "") + lines[i];
    return o;
  }

 private:
  bool ok_ = true;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << std::fixed << v;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome sample_size() {
  Check c;
  const std::vector<std::pair<std::size_t, std::size_t>> table = {
      {492, 216}, {736, 253}, {682, 246}, {2826, 339}, {1636, 312},
      {1035, 281}, {443, 206}, {1420, 303}, {1049, 282}};
  double worst = 0.0;
  for (auto [n, expected] : table) {
    const auto t0 = Clock::now();
    const auto got = required_sample_size(n, 0.95, 0.05);
    const double ms = ms_since(t0);
    worst = std::max(worst, ms);
    c.expect(got == expected, "N=" + std::to_string(n) + " gave " + std::to_string(got) + ", want " +
                                  std::to_string(expected));
    c.expect(ms < 1.0, "N=" + std::to_string(n) + " took " + fmt(ms, 3) + " ms");
  }
  c.note("9/9 exact, slowest " + fmt(worst, 3) + " ms");
  return c.outcome();
}

Outcome aggregation_truth_table() {
  Check c;
  const auto t0 = Clock::now();
  // Essential/optional membership written out by hand.
  struct Rule {
    Attribute attribute;
    std::vector<CriterionId> essential;
    std::vector<CriterionId> optional;
  };
  const std::vector<Rule> rules = {
      {Attribute::Relevance, {CriterionId::RE1}, {CriterionId::RO1, CriterionId::RO2}},
      {Attribute::Informativeness, {CriterionId::IE1, CriterionId::IE2}, {CriterionId::IO1, CriterionId::IO2}},
      {Attribute::Expression, {CriterionId::EE1, CriterionId::EE2}, {CriterionId::EO1, CriterionId::EO2}},
  };
  std::size_t mismatches = 0;
  for (unsigned mask = 0; mask < (1u << kCriterionCount); ++mask) {
    CriterionVerdicts v;
    for (std::size_t i = 0; i < kCriterionCount; ++i) v[kCriteria[i]] = (mask >> i) & 1u;
    const auto got = aggregate(v);
    for (const auto& r : rules) {
      bool all_essential = true;
      for (auto id : r.essential) all_essential = all_essential && v.at(id);
      bool any_optional = false;
      for (auto id : r.optional) any_optional = any_optional || v.at(id);
      const bool want = all_essential && any_optional;
      if (got.at(r.attribute) != want || aggregate(r.attribute, v) != want) ++mismatches;
    }
  }
  const double ms = ms_since(t0);
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");
  c.expect(ms < 1000.0, "took " + fmt(ms, 1) + " ms");
  c.note("2048 combinations x 3 attributes, " + fmt(ms, 1) + " ms");
  return c.outcome();
}

Outcome metric_properties() {
  Check c;
  Rng rng(20240501);
  std::vector<bool> labels(10000), random(10000);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = i % 2 == 0;
    random[i] = rng.below(2) == 1;
  }
  const auto m = metrics(confusion(random, labels));
  c.expect(m.balanced_accuracy.has_value(), "BA undefined for random predictor");
  const double ba = m.balanced_accuracy.value_or(-1.0);
  c.expect(ba >= 0.47 && ba <= 0.53, "random BA " + fmt(ba));

  const auto oracle = metrics(confusion(labels, labels));
  for (const auto& [name, v] : {std::pair{"BA", oracle.balanced_accuracy}, std::pair{"precision", oracle.precision},
                                std::pair{"recall", oracle.recall}, std::pair{"F1", oracle.f1}}) {
    c.expect(v.has_value() && *v == 1.0, std::string("oracle ") + name + " != 1.0");
  }
  c.note("random BA " + fmt(ba) + ", oracle all 1.0");
  return c.outcome();
}

Outcome kappa_oracle() {
  Check c;
  std::size_t cases = 0;
  for (unsigned n = 1; n <= 8; ++n) {
    for (unsigned ma = 0; ma < (1u << n); ++ma) {
      for (unsigned mb = 0; mb < (1u << n); ++mb) {
        std::vector<bool> a(n), b(n);
        long long table[2][2] = {{0, 0}, {0, 0}};
        for (unsigned i = 0; i < n; ++i) {
          a[i] = (ma >> i) & 1u;
          b[i] = (mb >> i) & 1u;
          ++table[a[i]][b[i]];
        }
        const long long nn = n;
        const long long agree = table[0][0] + table[1][1];
        const long long a1 = table[1][0] + table[1][1], b1 = table[0][1] + table[1][1];
        const long long chance = a1 * b1 + (nn - a1) * (nn - b1);
        // kappa = (n*agree - chance) / (n^2 - chance); both zero when every
        // label is one class in both annotations.
        const long long den = nn * nn - chance;
        const double want = den == 0 ? 1.0 : static_cast<double>(nn * agree - chance) / static_cast<double>(den);
        const double got = cohens_kappa(a, b);
        if (got != want) {
          c.expect(false, "n=" + std::to_string(n) + " a=" + std::to_string(ma) + " b=" + std::to_string(mb) +
                              ": " + fmt(got, 17) + " vs " + fmt(want, 17));
        }
        ++cases;
      }
    }
  }
  for (unsigned n = 1; n <= 8; ++n) {
    std::vector<bool> same(n);
    for (unsigned i = 0; i < n; ++i) same[i] = i % 3 == 0;
    c.expect(cohens_kappa(same, same) == 1.0, "perfect agreement at n=" + std::to_string(n));
  }
  c.note(std::to_string(cases) + " label pairs exact");
  return c.outcome();
}

Corpus acceptance_corpus() { return load_corpus(fs::path(CRC_TEST_DATA_DIR) / "toy_corpus.jsonl"); }

std::size_t count_label(const Corpus& corpus, Attribute a, bool value) {
  return static_cast<std::size_t>(std::count_if(corpus.instances.begin(), corpus.instances.end(),
                                                [&](const ReviewInstance& i) { return i.label(a) == value; }));
}

std::vector<std::string> ids(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& i : corpus.instances) out.push_back(i.id);
  std::sort(out.begin(), out.end());
  return out;
}

Outcome upsampling_contract() {
  Check c;
  const auto corpus = acceptance_corpus();
  const int k = 5;
  const auto plan = make_folds(corpus, k, 7);
  std::size_t rounds = 0;
  for (auto a : kAttributes) {
    for (int fold = 0; fold < k; ++fold) {
      const std::string where = std::string(to_string(a)) + " fold " + std::to_string(fold);
      const auto plain = make_round(corpus, plan, fold, a, false, 7);
      const auto up = make_round(corpus, plan, fold, a, true, 7);

      auto expected_test = plan.held_out(fold).test;
      std::sort(expected_test.begin(), expected_test.end());
      c.expect(ids(plain.test) == expected_test, where + ": test half differs from plan");
      c.expect(ids(up.test) == ids(plain.test), where + ": test half changed by augmentation");
      c.expect(nlohmann::json(ids(up.test)).dump() == nlohmann::json(ids(plain.test)).dump(),
               where + ": test serialization changed");

      const std::set<std::string> test_ids(expected_test.begin(), expected_test.end());
      for (const auto* slice : {&up.train, &up.validation}) {
        for (const auto& inst : slice->instances) {
          c.expect(!test_ids.count(inst.id), where + ": test id " + inst.id + " leaked");
        }
      }

      const auto pos = count_label(up.train, a, true), neg = count_label(up.train, a, false);
      if (!up.upsample_skipped && count_label(plain.train, a, false) > 0) {
        c.expect(pos == neg, where + ": " + std::to_string(pos) + " positives vs " + std::to_string(neg) +
                                 " negatives after up-sampling");
      }
      // Direct call on the training slice.
      if (count_label(plain.train, a, false) > 0 &&
          count_label(plain.train, a, false) <= count_label(plain.train, a, true)) {
        const auto direct = upsample_negatives(plain.train, a, 99);
        c.expect(count_label(direct, a, true) == count_label(direct, a, false), where + ": direct call unbalanced");
      }
      ++rounds;
    }
  }
  c.note(std::to_string(rounds) + " rounds balanced, test halves unchanged");
  return c.outcome();
}

nlohmann::json run_evaluate(const fs::path& out_dir) {
  const auto corpus = (fs::path(CRC_TEST_DATA_DIR) / "toy_corpus.jsonl").string();
  const auto dir = out_dir.string();
  const std::vector<const char*> argv = {"crc-clarity", "--seed", "11",   "evaluate", corpus.c_str(), "-b",
                                         "heuristic",   "-b",     "forest", "--trees", "30",          "-o",
                                         dir.c_str()};
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (rc != 0) throw std::runtime_error("evaluate exited " + std::to_string(rc) + ": " + err.str());
  std::ifstream in(out_dir / "report.json");
  return nlohmann::json::parse(in);
}

Outcome fold_determinism() {
  Check c;
  const auto corpus = acceptance_corpus();
  c.expect(make_folds(corpus, 5, 3).hash() == make_folds(corpus, 5, 3).hash(), "make_folds hash not stable");

  const auto base = fs::temp_directory_path() / ("crc-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  try {
    const auto first = run_evaluate(base / "a");
    const auto second = run_evaluate(base / "b");
    const auto hash = first.at("fold_plan_hash").get<std::string>();
    c.expect(hash == second.at("fold_plan_hash").get<std::string>(), "fold plan hash differs between runs");
    std::set<std::string> backends;
    for (const auto& b : first.at("backends")) {
      backends.insert(b.at("name").get<std::string>());
      for (const auto& a : b.at("attributes")) {
        c.expect(a.at("fold_plan_hash").get<std::string>() == hash,
                 b.at("name").get<std::string>() + " used a different plan");
      }
    }
    c.expect(backends == std::set<std::string>{"heuristic", "forest"}, "report lacks a backend");
    c.note("hash " + hash + " shared by heuristic and forest across two runs");
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  fs::remove_all(base);
  return c.outcome();
}

Outcome preprocessing_golden() {
  Check c;
  ReviewInstance inst;
  inst.id = "golden";
  inst.comment = "Rename this.";
  inst.diff_hunk = "- old\n+ new\n  ctx";
  const auto in = preprocess(inst);
  c.expect(in.normalized_diff == "[DELETE] old [ADD] new", "normalized diff was \"" + in.normalized_diff + "\"");
  std::size_t seps = 0;
  for (auto pos = in.fused_text.find(kSepToken); pos != std::string::npos;
       pos = in.fused_text.find(kSepToken, pos + kSepToken.size())) {
    ++seps;
  }
  c.expect(seps == 1, std::to_string(seps) + " separators in fused text");
  c.expect(in.fused_text == "Rename this. [SEP] [DELETE] old [ADD] new", "fused text was \"" + in.fused_text + "\"");
  c.note("\"" + in.normalized_diff + "\", one [SEP]");
  return c.outcome();
}

struct Synthetic {
  FeatureMatrix<double> x;
  LabelVector y;
};

// Feature 0 separates the classes; the remaining columns are noise.
Synthetic separable_set(std::uint64_t seed) {
  constexpr Eigen::Index n = 40, noise = 4;
  Rng rng(seed);
  Synthetic s{FeatureMatrix<double>(n, noise + 1), LabelVector(n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    const bool pos = r % 2 == 0;
    s.y(r) = pos;
    s.x(r, 0) = pos ? 0.6 + 0.4 * rng.uniform() : 0.4 * rng.uniform();
    for (Eigen::Index j = 1; j <= noise; ++j) s.x(r, j) = rng.uniform();
  }
  return s;
}

// Brute force: some feature and threshold (midpoints of sorted values)
// classify every point correctly in one direction or the other.
bool single_feature_separable(const Synthetic& s) {
  for (Eigen::Index f = 0; f < s.x.cols(); ++f) {
    std::vector<double> values(s.x.col(f).begin(), s.x.col(f).end());
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = (values[i] + values[i + 1]) / 2.0;
      bool above_pos = true, above_neg = true;
      for (Eigen::Index r = 0; r < s.x.rows(); ++r) {
        const bool above = s.x(r, f) > t;
        above_pos = above_pos && above == s.y(r);
        above_neg = above_neg && above != s.y(r);
      }
      if (above_pos || above_neg) return true;
    }
  }
  return false;
}

Outcome classifier_sanity() {
  Check c;
  const auto t0 = Clock::now();
  const auto data = separable_set(40);
  c.expect(single_feature_separable(data), "synthetic set is not separable");

  const int k = 5;
  std::vector<int> order(static_cast<std::size_t>(data.x.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng(41).shuffle(std::span<int>(order));

  std::vector<int> dense(static_cast<std::size_t>(data.x.cols()));
  std::iota(dense.begin(), dense.end(), 0);
  Confusion pooled;
  double worst_fold = 1.0;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<int> train, test;
    for (std::size_t i = 0; i < order.size(); ++i) (static_cast<int>(i) % k == fold ? test : train).push_back(order[i]);
    FeatureMatrix<double> xt(static_cast<Eigen::Index>(train.size()), data.x.cols());
    LabelVector yt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      xt.row(static_cast<Eigen::Index>(i)) = data.x.row(train[i]);
      yt(static_cast<Eigen::Index>(i)) = data.y(train[i]);
    }
    ForestParams params;
    params.seed = static_cast<std::uint64_t>(fold) + 1;
    const auto forest = RandomForest<double>::fit(xt, yt, params, dense);
    std::vector<bool> predicted, truth;
    for (int r : test) {
      predicted.push_back(forest.score(data.x.row(r)) >= 0.5);
      truth.push_back(data.y(r));
    }
    const auto conf = confusion(predicted, truth);
    pooled += conf;
    if (const auto ba = balanced_accuracy(conf)) worst_fold = std::min(worst_fold, *ba);
  }
  const double ms = ms_since(t0);
  const double ba = balanced_accuracy(pooled).value_or(0.0);
  c.expect(ba >= 0.95, "held-out BA " + fmt(ba));
  c.expect(ms < 10000.0, "took " + fmt(ms, 0) + " ms");
  c.note("held-out BA " + fmt(ba) + " (worst fold " + fmt(worst_fold) + "), " + fmt(ms, 0) + " ms");

  // Label distribution of a supplied labeled corpus.
  if (const char* path = std::getenv("CRC_LABELED_CORPUS"); path && *path) {
    const std::vector<const char*> argv = {"crc-clarity", "stats", path};
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    c.expect(rc == 0, "stats exited " + std::to_string(rc) + ": " + err.str());
    std::istringstream lines(out.str());
    std::string line;
    std::vector<double> cells;
    while (std::getline(lines, line)) {
      if (!line.starts_with("| Overall |")) continue;
      std::istringstream row(line);
      std::string cell;
      std::vector<std::string> parts;
      while (std::getline(row, cell, '|')) parts.push_back(cell);
      for (std::size_t i = 3; i < parts.size(); ++i) {
        if (parts[i].find_first_not_of(' ') != std::string::npos) cells.push_back(std::stod(parts[i]));
      }
    }
    const std::vector<double> expected = {11.4, 19.3, 5.8, 71.2};
    c.expect(cells.size() == expected.size(), "stats output lacks an Overall row");
    for (std::size_t i = 0; i < std::min(cells.size(), expected.size()); ++i) {
      c.expect(std::abs(cells[i] - expected[i]) <= 0.1 + 1e-9,
               "Overall column " + std::to_string(i) + ": " + fmt(cells[i], 1) + " vs " + fmt(expected[i], 1));
    }
    c.note("labeled corpus distribution within 0.1");
  } else {
    c.note("labeled-corpus distribution check skipped (CRC_LABELED_CORPUS unset)");
  }
  return c.outcome();
}

// Offline chat endpoint driven by a per-call script.
class ScriptedTransport : public ChatTransport {
 public:
  using Script = std::function<std::string(const std::string& prompt, int call)>;
  explicit ScriptedTransport(Script script) : script_(std::move(script)) {}
  std::string complete(const std::string& prompt, int) override {
    int call;
    {
      std::lock_guard lock(mu_);
      call = ++calls_[prompt];
      ++total_;
    }
    return script_(prompt, call);
  }
  int total() const { return total_; }

 private:
  Script script_;
  std::mutex mu_;
  std::map<std::string, int> calls_;
  int total_ = 0;
};

AttributeVerdicts verdicts_of(unsigned mask) {
  return {{Attribute::Relevance, (mask & 1u) != 0},
          {Attribute::Informativeness, (mask & 2u) != 0},
          {Attribute::Expression, (mask & 4u) != 0}};
}

ReviewInstance llm_instance(unsigned i) {
  ReviewInstance inst;
  inst.id = "llm-" + std::to_string(100 + i);
  inst.language = Language::Python;
  inst.comment = "Case marker " + std::to_string(i % 8) + " for item " + std::to_string(i) + ".";
  inst.diff_hunk = "- a = 1\n+ a = 2";
  return inst;
}

unsigned marker_in(const std::string& prompt) {
  const auto pos = prompt.find("Case marker ");
  return static_cast<unsigned>(prompt.at(pos + 12) - '0');
}

Outcome llm_round_trip() {
  Check c;
  for (unsigned mask = 0; mask < 8; ++mask) {
    const auto v = verdicts_of(mask);
    const auto parsed = parse_response(render_verdicts(v));
    c.expect(std::holds_alternative<AttributeVerdicts>(parsed) && std::get<AttributeVerdicts>(parsed) == v,
             "combination " + std::to_string(mask) + " did not round-trip");
  }

  std::vector<ReviewInstance> instances;
  for (unsigned i = 0; i < 24; ++i) instances.push_back(llm_instance(i));

  // Retry: the first answer per prompt is unusable, the second is valid.
  {
    ScriptedTransport t([](const std::string& prompt, int call) {
      return call == 1 ? std::string("I cannot tell.") : render_verdicts(verdicts_of(marker_in(prompt)));
    });
    LlmOptions opt;
    opt.concurrency = 4;
    const auto out = evaluate_remote(t, instances, opt);
    bool ok = out.size() == instances.size();
    for (std::size_t i = 0; ok && i < out.size(); ++i) {
      ok = out[i].id == instances[i].id && !out[i].fallback && out[i].attempts == 2 &&
           out[i].verdicts == verdicts_of(static_cast<unsigned>(i % 8));
    }
    c.expect(ok, "retry after an invalid answer did not recover");
  }
  // Fallback: every answer is unusable, so 1 + retries calls each.
  {
    ScriptedTransport t([](const std::string&, int) { return std::string("Relevance: maybe"); });
    LlmOptions opt;
    opt.retries = 2;
    const auto out = evaluate_remote(t, instances, opt);
    bool ok = t.total() == static_cast<int>(instances.size()) * 3;
    for (const auto& v : out) ok = ok && v.fallback && v.attempts == 3 && v.verdicts == opt.fallback;
    c.expect(ok, "invalid output did not fall back after retries");
  }
  // Order: answers arrive out of order under concurrency.
  {
    ScriptedTransport t([](const std::string& prompt, int) {
      const unsigned m = marker_in(prompt);
      std::this_thread::sleep_for(std::chrono::milliseconds((7 - m) * 2));
      return "Sure.\n" + render_verdicts(verdicts_of(m));
    });
    LlmOptions opt;
    opt.concurrency = 6;
    std::ostringstream transcript;
    const auto out = evaluate_remote(t, instances, opt, &transcript);
    bool ok = out.size() == instances.size();
    for (std::size_t i = 0; ok && i < out.size(); ++i) {
      ok = out[i].id == instances[i].id && out[i].verdicts == verdicts_of(static_cast<unsigned>(i % 8));
    }
    std::istringstream lines(transcript.str());
    std::string line;
    std::size_t n = 0;
    while (ok && std::getline(lines, line)) {
      ok = nlohmann::json::parse(line).at("id") == instances.at(n).id;
      ++n;
    }
    c.expect(ok && n == instances.size(), "results or transcript out of input order");
  }
  c.note("8/8 combinations; retry, fallback and ordering offline");
  return c.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sample-size", sample_size},
      {"aggregation-truth-table", aggregation_truth_table},
      {"metric-properties", metric_properties},
      {"kappa-oracle", kappa_oracle},
      {"upsampling-contract", upsampling_contract},
      {"fold-determinism", fold_determinism},
      {"preprocessing-golden", preprocessing_golden},
      {"classifier-sanity", classifier_sanity},
      {"llm-round-trip", llm_round_trip},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.ok) ++failed;
    std::cout << (o.ok ? "PASS " : "FAIL ") << name << (o.detail.empty() ? "" : "  " + o.detail) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
