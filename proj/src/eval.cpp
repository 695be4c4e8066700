#include "crc/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "crc/rng.hpp"

namespace crc {
namespace {

std::vector<bool> labels_of(const std::vector<ReviewInstance>& instances, Attribute a) {
  std::vector<bool> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(inst.label(a));
  return out;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class HeuristicPredictor : public Predictor {
 public:
  HeuristicPredictor(std::shared_ptr<const HeuristicChecker> checker, MarkerMode mode, Attribute a)
      : checker_(std::move(checker)), mode_(mode), attribute_(a) {}
  std::vector<bool> predict(const std::vector<ReviewInstance>& instances) override {
    std::vector<bool> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
      const auto verdicts = checker_->check_all(inst, preprocess(inst, mode_));
      out.push_back(aggregate(attribute_, verdicts));
    }
    return out;
  }

 private:
  std::shared_ptr<const HeuristicChecker> checker_;
  MarkerMode mode_;
  Attribute attribute_;
};

class ForestPredictor : public Predictor {
 public:
  explicit ForestPredictor(ForestClassifier model) : model_(std::move(model)) {}
  std::vector<bool> predict(const std::vector<ReviewInstance>& instances) override {
    std::vector<bool> out;
    out.reserve(instances.size());
    for (const auto& p : model_.predict(instances)) out.push_back(p.label);
    return out;
  }

 private:
  ForestClassifier model_;
};

}  // namespace

// --- heuristic / forest -----------------------------------------------------

HeuristicBackend::HeuristicBackend(std::shared_ptr<const HeuristicChecker> checker, MarkerMode mode)
    : checker_(std::move(checker)), mode_(mode) {}

std::unique_ptr<Predictor> HeuristicBackend::fit(const Corpus&, const Corpus&, Attribute attribute,
                                                 std::uint64_t) const {
  return std::make_unique<HeuristicPredictor>(checker_, mode_, attribute);
}

std::unique_ptr<Predictor> ForestBackend::fit(const Corpus& train, const Corpus&, Attribute attribute,
                                              std::uint64_t seed) const {
  auto params = params_;
  params.forest.seed = Rng(seed, fnv1a64("forest_backend")).split(to_string(attribute)).next();
  return std::make_unique<ForestPredictor>(ForestClassifier::train(train, attribute, params));
}

// --- llm --------------------------------------------------------------------

class LlmPredictor : public Predictor {
 public:
  LlmPredictor(const LlmBackend& backend, Attribute a) : backend_(backend), attribute_(a) {}
  std::vector<bool> predict(const std::vector<ReviewInstance>& instances) override {
    std::vector<ReviewInstance> missing;
    {
      std::lock_guard lock(backend_.mu_);
      for (const auto& inst : instances) {
        if (!backend_.cache_.contains(inst.id)) missing.push_back(inst);
      }
    }
    if (!missing.empty()) {
      auto fresh = evaluate_remote(*backend_.transport_, missing, backend_.options_, nullptr);
      std::lock_guard lock(backend_.mu_);
      for (auto& v : fresh) backend_.cache_.emplace(v.id, std::move(v));
    }
    std::vector<bool> out;
    fallbacks_ = 0;
    std::lock_guard lock(backend_.mu_);
    for (const auto& inst : instances) {
      const auto& v = backend_.cache_.at(inst.id);
      fallbacks_ += v.fallback;
      out.push_back(v.verdicts.at(attribute_));
    }
    return out;
  }
  std::size_t fallbacks() const override { return fallbacks_; }

 private:
  const LlmBackend& backend_;
  Attribute attribute_;
  std::size_t fallbacks_ = 0;
};

LlmBackend::LlmBackend(std::shared_ptr<ChatTransport> transport, LlmOptions options, std::ostream* transcript)
    : transport_(std::move(transport)), options_(std::move(options)), transcript_(transcript) {}

void LlmBackend::prepare(const Corpus& corpus) {
  std::vector<ReviewInstance> todo;
  {
    std::lock_guard lock(mu_);
    for (const auto& inst : corpus.instances) {
      if (!cache_.contains(inst.id)) todo.push_back(inst);
    }
  }
  auto verdicts = evaluate_remote(*transport_, todo, options_, transcript_);
  std::lock_guard lock(mu_);
  for (auto& v : verdicts) cache_.emplace(v.id, std::move(v));
}

std::unique_ptr<Predictor> LlmBackend::fit(const Corpus&, const Corpus&, Attribute attribute,
                                           std::uint64_t) const {
  return std::make_unique<LlmPredictor>(*this, attribute);
}

std::size_t LlmBackend::total_fallbacks() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(cache_.begin(), cache_.end(), [](const auto& kv) { return kv.second.fallback; }));
}

// --- folds ------------------------------------------------------------------

FoldRound make_round(const Corpus& corpus, const FoldPlan& plan, int fold, Attribute attribute, bool upsample,
                     std::uint64_t seed) {
  const auto held = plan.held_out(fold);
  const std::set<std::string> validation_ids(held.validation.begin(), held.validation.end());
  const std::set<std::string> test_ids(held.test.begin(), held.test.end());
  FoldRound round;
  round.train.source = round.validation.source = round.test.source = corpus.source;
  for (const auto& inst : corpus.instances) {
    const auto it = plan.assignment.find(inst.id);
    if (it == plan.assignment.end()) throw ArgumentError("instance " + inst.id + " is not in the fold plan");
    if (it->second != fold) {
      round.train.instances.push_back(inst);
    } else if (validation_ids.contains(inst.id)) {
      round.validation.instances.push_back(inst);
    } else {
      round.test.instances.push_back(inst);
    }
  }
  if (upsample) {
    const auto before = round.train.size();
    try {
      round.train = upsample_negatives(round.train, attribute, splitmix64(seed + static_cast<std::uint64_t>(fold)));
    } catch (const ArgumentError&) {
      // Negatives already outnumber positives in this slice.
      round.upsample_skipped = true;
    }
    round.upsampled = round.train.size() - before;
  }

  std::vector<std::string> test_after;
  for (const auto& inst : round.test.instances) test_after.push_back(inst.id);
  std::sort(test_after.begin(), test_after.end());
  if (test_after != held.test) throw std::logic_error("fold " + std::to_string(fold) + ": test slice changed");
  for (const auto* slice : {&round.train, &round.validation}) {
    for (const auto& inst : slice->instances) {
      if (test_ids.contains(inst.id)) {
        throw std::logic_error("fold " + std::to_string(fold) + ": test id " + inst.id + " leaked into fitting data");
      }
    }
  }
  return round;
}

std::map<Attribute, FoldPlan> plan_folds(const Corpus& corpus, const CvOptions& options) {
  std::map<Attribute, FoldPlan> plans;
  if (!options.stratify) {
    const auto shared = make_folds(corpus, options.k, options.seed);
    for (auto a : options.attributes) plans.emplace(a, shared);
  } else {
    for (auto a : options.attributes) plans.emplace(a, make_folds(corpus, options.k, options.seed, a));
  }
  return plans;
}

MetricAverage average_folds(const std::vector<FoldResult>& folds) {
  MetricAverage avg;
  auto mean = [&](const char* name, Metric MetricSet::*field) -> Metric {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : folds) {
      if (!f.failed && f.metrics.*field) {
        sum += *(f.metrics.*field);
        ++n;
      }
    }
    avg.excluded[name] = folds.size() - n;
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  avg.macro.balanced_accuracy = mean("balanced_accuracy", &MetricSet::balanced_accuracy);
  avg.macro.precision = mean("precision", &MetricSet::precision);
  avg.macro.recall = mean("recall", &MetricSet::recall);
  avg.macro.f1 = mean("f1", &MetricSet::f1);
  for (const auto& f : folds) {
    if (!f.failed) avg.pooled_confusion += f.confusion;
  }
  avg.pooled = metrics(avg.pooled_confusion);
  return avg;
}

EvalReport cross_validate(const std::vector<Backend*>& backends, const Corpus& corpus, const CvOptions& options) {
  return cross_validate(backends, corpus, options, plan_folds(corpus, options));
}

EvalReport cross_validate(const std::vector<Backend*>& backends, const Corpus& corpus, const CvOptions& options,
                          const std::map<Attribute, FoldPlan>& plans) {
  validate_corpus(corpus);
  for (const auto& inst : corpus.instances) {
    for (auto a : options.attributes) {
      if (!inst.labeled_for(a)) {
        throw ValidationError("instance " + inst.id + " has no " + std::string(to_string(a)) + " label");
      }
    }
  }
  EvalReport report;
  report.k = options.k;
  report.seed = options.seed;
  report.corpus_size = corpus.size();
  for (auto a : options.attributes) report.fold_plan_hashes[a] = plans.at(a).hash();

  // Slices are built once and shared by every backend.
  std::map<std::pair<Attribute, int>, FoldRound> rounds;
  for (auto a : options.attributes) {
    for (int f = 0; f < options.k; ++f) {
      rounds.emplace(std::pair{a, f}, make_round(corpus, plans.at(a), f, a, options.upsample, options.seed));
    }
  }

  struct Task {
    std::size_t backend, attribute;
    int fold;
  };
  std::vector<Task> tasks;
  report.backends.resize(backends.size());
  std::vector<std::string> prepare_errors(backends.size());
  for (std::size_t b = 0; b < backends.size(); ++b) {
    auto& br = report.backends[b];
    br.name = backends[b]->name();
    br.group = backends[b]->group();
    try {
      backends[b]->prepare(corpus);
    } catch (const std::exception& e) {
      prepare_errors[b] = e.what();
    }
    for (std::size_t ai = 0; ai < options.attributes.size(); ++ai) {
      AttributeResult ar;
      ar.attribute = options.attributes[ai];
      ar.fold_plan_hash = report.fold_plan_hashes.at(ar.attribute);
      ar.folds.resize(static_cast<std::size_t>(options.k));
      br.attributes.push_back(std::move(ar));
      for (int f = 0; f < options.k; ++f) tasks.push_back({b, ai, f});
    }
  }

  auto run = [&](const Task& t) {
    const auto attribute = options.attributes[t.attribute];
    const auto& round = rounds.at({attribute, t.fold});
    auto& result = report.backends[t.backend].attributes[t.attribute].folds[static_cast<std::size_t>(t.fold)];
    result.fold = t.fold;
    result.train_size = round.train.size();
    result.upsampled = round.upsampled;
    result.upsample_skipped = round.upsample_skipped;
    result.validation_size = round.validation.size();
    if (!prepare_errors[t.backend].empty()) {
      result.failed = true;
      result.error = prepare_errors[t.backend];
      return;
    }
    try {
      const auto seed = Rng(options.seed).split(static_cast<std::uint64_t>(t.fold)).next();
      auto predictor = backends[t.backend]->fit(round.train, round.validation, attribute, seed);
      const auto predictions = predictor->predict(round.test.instances);
      result.confusion = confusion(predictions, labels_of(round.test.instances, attribute));
      result.metrics = metrics(result.confusion);
      result.fallbacks = predictor->fallbacks();
    } catch (const std::exception& e) {
      result.failed = true;
      result.error = e.what();
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < tasks.size(); i = next++) run(tasks[i]);
  };
  {
    const auto threads = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }

  for (auto& br : report.backends) {
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (auto& ar : br.attributes) {
      ar.average = average_folds(ar.folds);
      for (const auto& f : ar.folds) {
        ar.failed_folds += f.failed;
        ar.fallbacks += f.fallbacks;
      }
      auto add = [&](const char* name, const Metric& m) {
        if (m) {
          sums[name].first += *m;
          ++sums[name].second;
        }
      };
      add("ba", ar.average.macro.balanced_accuracy);
      add("p", ar.average.macro.precision);
      add("r", ar.average.macro.recall);
      add("f1", ar.average.macro.f1);
    }
    auto mean = [&](const char* name) -> Metric {
      const auto it = sums.find(name);
      if (it == sums.end()) return std::nullopt;
      return it->second.first / static_cast<double>(it->second.second);
    };
    br.attribute_average = {mean("ba"), mean("p"), mean("r"), mean("f1")};
  }
  return report;
}

// --- report -----------------------------------------------------------------

std::string EvalReport::fold_plan_hash() const {
  std::set<std::string> distinct;
  std::string joined;
  for (const auto& [a, h] : fold_plan_hashes) {
    distinct.insert(h);
    joined += std::string(to_string(a)) + ":" + h + ";";
  }
  if (distinct.size() == 1) return *distinct.begin();
  return hex16(fnv1a64(joined));
}

namespace {

nlohmann::json metric_json(const Metric& m) { return m ? nlohmann::json(*m) : nlohmann::json(nullptr); }

nlohmann::json metric_set_json(const MetricSet& m) {
  return {{"balanced_accuracy", metric_json(m.balanced_accuracy)},
          {"precision", metric_json(m.precision)},
          {"recall", metric_json(m.recall)},
          {"f1", metric_json(m.f1)}};
}

nlohmann::json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& [a, h] : fold_plan_hashes) hashes[std::string(to_string(a))] = h;
  nlohmann::json out = {{"run_config", run_config}, {"k", k}, {"seed", seed}, {"corpus_size", corpus_size},
                        {"fold_plan_hash", fold_plan_hash()}, {"fold_plan_hashes", hashes}};
  auto& list = out["backends"] = nlohmann::json::array();
  for (const auto& b : backends) {
    nlohmann::json jb = {{"name", b.name}, {"group", b.group},
                         {"attribute_average", metric_set_json(b.attribute_average)}};
    auto& attrs = jb["attributes"] = nlohmann::json::array();
    for (const auto& a : b.attributes) {
      nlohmann::json ja = {{"attribute", to_string(a.attribute)},
                           {"fold_plan_hash", a.fold_plan_hash},
                           {"failed_folds", a.failed_folds},
                           {"fallbacks", a.fallbacks},
                           {"macro", metric_set_json(a.average.macro)},
                           {"excluded_folds", a.average.excluded},
                           {"pooled", metric_set_json(a.average.pooled)},
                           {"pooled_confusion", confusion_json(a.average.pooled_confusion)}};
      auto& folds = ja["folds"] = nlohmann::json::array();
      for (const auto& f : a.folds) {
        nlohmann::json jf = {{"fold", f.fold},
                             {"failed", f.failed},
                             {"train_size", f.train_size},
                             {"upsampled", f.upsampled},
                             {"upsample_skipped", f.upsample_skipped},
                             {"validation_size", f.validation_size},
                             {"fallbacks", f.fallbacks},
                             {"confusion", confusion_json(f.confusion)},
                             {"metrics", metric_set_json(f.metrics)}};
        if (f.failed) jf["error"] = f.error;
        folds.push_back(std::move(jf));
      }
      attrs.push_back(std::move(ja));
    }
    list.push_back(std::move(jb));
  }
  return out;
}

namespace {

Metric metric_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

MetricSet metric_set_from(const nlohmann::json& j) {
  return {metric_from(j.at("balanced_accuracy")), metric_from(j.at("precision")), metric_from(j.at("recall")),
          metric_from(j.at("f1"))};
}

Confusion confusion_from(const nlohmann::json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("tn").get<std::size_t>(),
          j.at("fn").get<std::size_t>()};
}

}  // namespace

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.run_config = j.at("run_config");
    r.k = j.at("k").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.corpus_size = j.at("corpus_size").get<std::size_t>();
    for (const auto& [a, h] : j.at("fold_plan_hashes").items()) r.fold_plan_hashes[parse_attribute(a)] = h;
    for (const auto& jb : j.at("backends")) {
      BackendResult b;
      b.name = jb.at("name").get<std::string>();
      b.group = jb.at("group").get<std::string>();
      b.attribute_average = metric_set_from(jb.at("attribute_average"));
      for (const auto& ja : jb.at("attributes")) {
        AttributeResult a;
        a.attribute = parse_attribute(ja.at("attribute").get<std::string>());
        a.fold_plan_hash = ja.at("fold_plan_hash").get<std::string>();
        a.failed_folds = ja.at("failed_folds").get<std::size_t>();
        a.fallbacks = ja.at("fallbacks").get<std::size_t>();
        a.average.macro = metric_set_from(ja.at("macro"));
        a.average.excluded = ja.at("excluded_folds").get<std::map<std::string, std::size_t>>();
        a.average.pooled = metric_set_from(ja.at("pooled"));
        a.average.pooled_confusion = confusion_from(ja.at("pooled_confusion"));
        for (const auto& jf : ja.at("folds")) {
          FoldResult f;
          f.fold = jf.at("fold").get<int>();
          f.failed = jf.at("failed").get<bool>();
          f.error = jf.value("error", "");
          f.train_size = jf.at("train_size").get<std::size_t>();
          f.upsampled = jf.at("upsampled").get<std::size_t>();
          f.upsample_skipped = jf.at("upsample_skipped").get<bool>();
          f.validation_size = jf.at("validation_size").get<std::size_t>();
          f.fallbacks = jf.at("fallbacks").get<std::size_t>();
          f.confusion = confusion_from(jf.at("confusion"));
          f.metrics = metric_set_from(jf.at("metrics"));
          a.folds.push_back(std::move(f));
        }
        b.attributes.push_back(std::move(a));
      }
      r.backends.push_back(std::move(b));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed report: ") + e.what());
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("malformed report: ") + e.what());
  }
}

std::string format_percent(const Metric& m) {
  if (!m) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up(*m * 100.0, 2));
  return buf;
}

namespace {

// Renders rows of metric cells, bolding the maximum of each column.
void metric_table(std::ostringstream& out, const std::vector<std::string>& header,
                  const std::vector<std::string>& labels, const std::vector<std::vector<Metric>>& rows,
                  const std::vector<std::vector<std::string>>& extra = {}) {
  out << "|";
  for (const auto& h : header) out << " " << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << "\n";
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<std::string> best(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    std::optional<double> max;
    for (const auto& r : rows) {
      if (r[c] && (!max || round_half_up(*r[c] * 100.0, 2) > *max)) max = round_half_up(*r[c] * 100.0, 2);
    }
    if (max && rows.size() > 1) best[c] = format_percent(*max / 100.0);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << "| " << labels[i] << " |";
    for (std::size_t c = 0; c < cols; ++c) {
      const auto cell = format_percent(rows[i][c]);
      out << " " << (!best[c].empty() && cell == best[c] ? "**" + cell + "**" : cell) << " |";
    }
    if (i < extra.size()) {
      for (const auto& e : extra[i]) out << " " << e << " |";
    }
    out << "\n";
  }
}

std::vector<Metric> cells(const MetricSet& m) { return {m.balanced_accuracy, m.precision, m.recall, m.f1}; }

}  // namespace

std::string render_markdown(const EvalReport& report) {
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  out << "Fold plan hash: `" << report.fold_plan_hash() << "` (k=" << report.k << ", seed=" << report.seed
      << ", " << report.corpus_size << " instances)\n\n";
  if (report.fold_plan_hashes.size() > 1) {
    std::set<std::string> distinct;
    for (const auto& [a, h] : report.fold_plan_hashes) distinct.insert(h);
    if (distinct.size() > 1) {
      for (const auto& [a, h] : report.fold_plan_hashes) out << "- " << to_string(a) << " plan: `" << h << "`\n";
      out << "\n";
    }
  }
  out << "Values are percentages. Macro columns average folds with a defined value; pooled columns "
         "score all test folds together. Bold marks the column maximum.\n\n";

  if (report.backends.empty()) return out.str();
  std::vector<Attribute> attributes;
  for (const auto& a : report.backends.front().attributes) attributes.push_back(a.attribute);

  for (std::size_t ai = 0; ai < attributes.size(); ++ai) {
    out << "## " << to_string(attributes[ai]) << "\n\n";
    std::vector<std::string> labels;
    std::vector<std::vector<Metric>> macro, pooled;
    std::vector<std::vector<std::string>> extra;
    for (const auto& b : report.backends) {
      const auto& a = b.attributes[ai];
      labels.push_back(b.name);
      macro.push_back(cells(a.average.macro));
      pooled.push_back(cells(a.average.pooled));
      extra.push_back({std::to_string(a.average.excluded.at("balanced_accuracy")), std::to_string(a.failed_folds),
                       std::to_string(a.fallbacks)});
    }
    metric_table(out, {"Backend", "BA", "P", "R", "F1", "BA excluded", "Failed folds", "Fallbacks"}, labels, macro,
                 extra);
    out << "\nPooled:\n\n";
    metric_table(out, {"Backend", "BA", "P", "R", "F1"}, labels, pooled);
    out << "\n";
  }

  out << "## Average over attributes\n\n";
  std::vector<std::string> labels;
  std::vector<std::vector<Metric>> rows;
  std::map<std::string, std::vector<const BackendResult*>> groups;
  for (const auto& b : report.backends) {
    labels.push_back(b.name);
    rows.push_back(cells(b.attribute_average));
    groups[b.group].push_back(&b);
  }
  metric_table(out, {"Backend", "BA", "P", "R", "F1"}, labels, rows);

  std::vector<std::string> group_labels;
  std::vector<std::vector<Metric>> group_rows;
  for (const auto& [group, members] : groups) {
    std::vector<Metric> row;
    for (std::size_t c = 0; c < 4; ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto* b : members) {
        if (const auto m = cells(b->attribute_average)[c]) {
          sum += *m;
          ++n;
        }
      }
      row.push_back(n ? Metric(sum / static_cast<double>(n)) : std::nullopt);
    }
    group_labels.push_back(group + " (" + std::to_string(members.size()) + ")");
    group_rows.push_back(std::move(row));
  }
  out << "\n## Average per group\n\n";
  metric_table(out, {"Group", "BA", "P", "R", "F1"}, group_labels, group_rows);

  bool any_failed = false;
  for (const auto& b : report.backends) {
    for (const auto& a : b.attributes) {
      for (const auto& f : a.folds) {
        if (!f.failed) continue;
        if (!any_failed) out << "\n## Failed folds\n\n";
        any_failed = true;
        out << "- " << b.name << " / " << to_string(a.attribute) << " / fold " << f.fold << ": " << f.error << "\n";
      }
    }
  }

  out << "\n## Run configuration\n\n```json\n" << report.run_config.dump(2) << "\n```\n";
  return out.str();
}

std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "fold_plan_hash,backend,group,attribute,fold,status,tp,fp,tn,fn,ba,precision,recall,f1,fallbacks\n";
  auto row = [&](const BackendResult& b, const AttributeResult& a, const std::string& fold, const std::string& status,
                 const std::optional<Confusion>& c, const MetricSet& m, std::size_t fallbacks) {
    out << a.fold_plan_hash << "," << b.name << "," << b.group << "," << to_string(a.attribute) << "," << fold
        << "," << status << ",";
    if (c) {
      out << c->tp << "," << c->fp << "," << c->tn << "," << c->fn;
    } else {
      out << ",,,";
    }
    for (const auto& v : cells(m)) out << "," << format_percent(v);
    out << "," << fallbacks << "\n";
  };
  for (const auto& b : report.backends) {
    for (const auto& a : b.attributes) {
      for (const auto& f : a.folds) {
        row(b, a, std::to_string(f.fold), f.failed ? "failed" : "ok",
            f.failed ? std::nullopt : std::optional(f.confusion), f.failed ? MetricSet{} : f.metrics, f.fallbacks);
      }
      row(b, a, "macro", "ok", std::nullopt, a.average.macro, a.fallbacks);
      row(b, a, "pooled", "ok", a.average.pooled_confusion, a.average.pooled, a.fallbacks);
    }
  }
  return out.str();
}

}  // namespace crc
