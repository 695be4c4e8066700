#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "crc/classifier.hpp"
#include "crc/corpus.hpp"
#include "crc/criteria.hpp"
#include "crc/eval.hpp"
#include "crc/llm_eval.hpp"
#include "crc/metrics.hpp"
#include "crc/preprocess.hpp"

namespace crc {
namespace {

struct Options {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string lexicons;
  bool strict_markers = false;
  HeuristicConfig heuristics;
  bool no_quote_fence = false;

  std::size_t population = 0;
  double confidence = 0.95;
  double margin = 0.05;

  std::string input;
  std::string second_input;
  std::string output;
  std::string out_dir = "report";
  std::string fold_plan;
  std::string transcript;
  std::string attribute;
  std::string stratify_on;
  std::string format = "md";
  int k = 5;
  bool stratify = false;
  bool no_upsample = false;
  bool per_language = false;
  bool explain = false;
  bool prompt_only = false;
  std::vector<std::string> backends;
  std::vector<std::string> models;
  std::string backend = "heuristic";
  std::string adapter_cmd;
  std::string adapter_name = "adapter";
  std::string adapter_dir = "adapter_models";

  FeatureConfig features;
  bool no_bigrams = false;
  bool no_checker_features = false;
  ForestParams forest;
  int llm_retries = 2;
  std::size_t llm_concurrency = 4;
};

std::size_t effective_jobs(const Options& o) {
  return o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
}

MarkerMode marker_mode(const Options& o) { return o.strict_markers ? MarkerMode::Strict : MarkerMode::Lenient; }

HeuristicConfig heuristic_config(const Options& o) {
  auto h = o.heuristics;
  if (o.no_quote_fence) h.quotes_count_as_fence = false;
  return h;
}

std::shared_ptr<const HeuristicChecker> make_checker(const Options& o) {
  auto lex = o.lexicons.empty() ? Lexicons::bundled() : Lexicons::from_directory(o.lexicons);
  return std::make_shared<HeuristicChecker>(heuristic_config(o), std::move(lex));
}

ClassifierParams classifier_params(const Options& o) {
  ClassifierParams p;
  p.features = o.features;
  p.features.bigrams = !o.no_bigrams;
  p.features.checker_features = !o.no_checker_features;
  p.forest = o.forest;
  p.forest.seed = o.seed;
  p.heuristics = heuristic_config(o);
  p.marker_mode = marker_mode(o);
  return p;
}

nlohmann::json run_config(const Options& o, const std::string& command) {
  const auto cp = classifier_params(o);
  nlohmann::json endpoint = nullptr;
  if (const char* url = std::getenv("CRC_LLM_ENDPOINT")) {
    const char* model = std::getenv("CRC_LLM_MODEL");
    endpoint = {{"url", url}, {"model", model ? model : ""}};
  }
  return {{"command", command},
          {"input", o.input},
          {"output", o.output.empty() ? o.out_dir : o.output},
          {"seed", o.seed},
          {"k", o.k},
          {"stratify", o.stratify},
          {"upsample", !o.no_upsample},
          {"confidence", o.confidence},
          {"margin", o.margin},
          {"backends", o.backends},
          {"fold_plan", o.fold_plan},
          {"marker_mode", o.strict_markers ? "strict" : "lenient"},
          {"lexicons", o.lexicons.empty() ? "bundled" : o.lexicons},
          {"heuristics", cp.heuristics},
          {"features", cp.features},
          {"forest", cp.forest},
          {"llm", {{"retries", o.llm_retries}, {"concurrency", o.llm_concurrency}, {"endpoint", endpoint}}},
          {"adapter", {{"command", o.adapter_cmd}, {"name", o.adapter_name}}}};
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error("cannot write " + path);
  fn(file);
  if (!file) throw Error("failed writing " + path);
}

std::string pct1(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", round_half_up(v, 1));
  return buf;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// --- commands ---------------------------------------------------------------

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto corpus = load_corpus(o.input);
  std::size_t labeled = 0;
  std::map<Language, std::size_t> per_language;
  for (const auto& inst : corpus.instances) {
    labeled += inst.labels.has_value();
    ++per_language[inst.language];
  }
  out << corpus.size() << " instances, " << labeled << " labeled\n";
  for (const auto& [lang, n] : per_language) out << "  " << to_string(lang) << ": " << n << "\n";
  if (!o.output.empty()) save_corpus(corpus, o.output);
  return 0;
}

int cmd_sample_size(const Options& o, std::ostream& out) {
  out << required_sample_size(o.population, o.confidence, o.margin) << "\n";
  return 0;
}

int cmd_sample(const Options& o, std::ostream& out, std::ostream& err) {
  const auto corpus = load_corpus(o.input);
  const auto sample = stratified_sample(corpus, o.confidence, o.margin, o.seed);
  std::map<Language, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& inst : corpus.instances) ++counts[inst.language].first;
  for (const auto& inst : sample.instances) ++counts[inst.language].second;
  // Counts go to stderr when the sample itself is written to stdout.
  auto& summary = o.output.empty() || o.output == "-" ? err : out;
  for (const auto& [lang, c] : counts) summary << to_string(lang) << "\t" << c.first << "\t" << c.second << "\n";
  summary << "Total\t" << corpus.size() << "\t" << sample.size() << "\n";
  with_output(o.output, out, [&](std::ostream& s) { write_corpus(sample, s); });
  return 0;
}

int cmd_split(const Options& o, std::ostream& out) {
  const auto corpus = load_corpus(o.input);
  std::optional<Attribute> on;
  if (!o.stratify_on.empty()) on = parse_attribute(o.stratify_on);
  const auto plan = make_folds(corpus, o.k, o.seed, on);
  if (!o.output.empty()) save_fold_plan(plan, o.output);
  const auto sizes = plan.fold_sizes();
  out << "fold plan " << plan.hash() << " (k=" << plan.k << ", seed=" << plan.seed << ")\n";
  for (std::size_t f = 0; f < sizes.size(); ++f) out << "  fold " << f << ": " << sizes[f] << "\n";
  return 0;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto dist = label_distribution(load_corpus(o.input));
  out << "| Language | # | Relevance | Informativeness | Expression | All Positive |\n";
  out << "| --- | ---: | ---: | ---: | ---: | ---: |\n";
  auto row = [&](const DistributionRow& r) {
    out << "| " << r.group << " | " << r.count;
    for (auto a : kAttributes) out << " | " << pct1(r.negative_pct.at(a));
    out << " | " << pct1(r.all_positive_pct) << " |\n";
  };
  if (o.per_language) {
    for (const auto& r : dist.languages) row(r);
  }
  row(dist.overall);
  out << "\nAttribute columns give the percentage of negative instances.\n";
  return 0;
}

int cmd_preprocess(const Options& o, std::ostream& out) {
  const auto corpus = load_corpus(o.input);
  with_output(o.output, out, [&](std::ostream& s) {
    for (const auto& inst : corpus.instances) {
      const auto in = preprocess(inst, marker_mode(o));
      s << nlohmann::json{{"id", inst.id}, {"normalized_diff", in.normalized_diff}, {"fused_text", in.fused_text}}
               .dump()
        << "\n";
    }
  });
  return 0;
}

int cmd_criteria(std::ostream& out) {
  out << catalog_to_json().dump(2) << "\n";
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto attribute = parse_attribute(o.attribute);
  auto corpus = load_corpus(o.input);
  std::size_t added = 0;
  if (!o.no_upsample) {
    const auto before = corpus.size();
    try {
      corpus = upsample_negatives(corpus, attribute, o.seed);
    } catch (const ArgumentError&) {
      out << "note: negatives outnumber positives; training without up-sampling\n";
    }
    added = corpus.size() - before;
  }
  auto params = classifier_params(o);
  params.forest.threads = effective_jobs(o);
  const auto model = ForestClassifier::train(corpus, attribute, params);
  model.save(o.output);
  out << "trained " << to_string(attribute) << " model on " << corpus.size() << " instances (" << added
      << " up-sampled), " << model.vocabulary().size() << " features, " << model.forest().trees().size()
      << " trees -> " << o.output << "\n";
  return 0;
}

std::string explain(Attribute a, const CriterionVerdicts& v) {
  std::vector<std::string> failed, optional_met;
  for (auto id : criteria_of(a)) {
    const auto& c = criterion(id);
    if (c.kind == CriterionKind::Essential && !v.at(id)) {
      failed.push_back(std::string(to_string(id)) + " (" + std::string(c.title) + ")");
    }
    if (c.kind == CriterionKind::Optional && v.at(id)) optional_met.push_back(std::string(to_string(id)));
  }
  auto join = [](const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  if (!failed.empty()) return "failed essential: " + join(failed);
  if (optional_met.empty()) return "no optional criterion met";
  return "essentials met; optional met: " + join(optional_met);
}

int cmd_predict(const Options& o, std::ostream& out) {
  if (o.backend == "forest") {
    if (o.models.empty()) throw ArgumentError("--backend forest needs at least one --model");
    std::vector<ForestClassifier> models;
    for (const auto& m : o.models) models.push_back(ForestClassifier::load(m));
    const auto corpus = load_corpus(o.input);
    for (const auto& inst : corpus.instances) {
      nlohmann::json j = {{"id", inst.id}, {"backend", "forest"}};
      for (const auto& m : models) {
        const auto p = m.predict(inst);
        j["attributes"][std::string(to_string(m.attribute()))] = p.label;
        j["scores"][std::string(to_string(m.attribute()))] = p.score;
      }
      out << j.dump() << "\n";
    }
    return 0;
  }
  if (o.backend != "heuristic") throw ArgumentError("predict supports --backend heuristic or forest");
  const auto checker = make_checker(o);
  const auto corpus = load_corpus(o.input);
  for (const auto& inst : corpus.instances) {
    const auto verdict = checker->evaluate(inst, preprocess(inst, marker_mode(o)));
    nlohmann::json j = {{"id", inst.id}, {"backend", "heuristic"}};
    for (auto a : kAttributes) {
      j["attributes"][std::string(to_string(a))] = verdict.attributes.at(a);
      if (o.explain) j["explanation"][std::string(to_string(a))] = explain(a, *verdict.criteria);
    }
    for (auto id : kCriteria) j["criteria"][std::string(to_string(id))] = verdict.criteria->at(id);
    out << j.dump() << "\n";
  }
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.backends.empty()) throw ArgumentError("give at least one --backend");
  const auto has = [&](const char* b) { return std::find(o.backends.begin(), o.backends.end(), b) != o.backends.end(); };
  // Configuration problems surface before any data is read.
  std::optional<EndpointConfig> endpoint;
  if (has("llm")) endpoint = EndpointConfig::from_env();
  if (has("adapter") && o.adapter_cmd.empty()) throw ArgumentError("--backend adapter needs --adapter-cmd");
  for (const auto& b : o.backends) {
    if (b != "heuristic" && b != "forest" && b != "llm" && b != "adapter") throw ArgumentError("unknown backend " + b);
  }

  const auto corpus = load_corpus(o.input);
  CvOptions cv;
  cv.k = o.k;
  cv.seed = o.seed;
  cv.upsample = !o.no_upsample;
  cv.stratify = o.stratify;
  cv.jobs = effective_jobs(o);
  std::map<Attribute, FoldPlan> plans;
  if (!o.fold_plan.empty()) {
    const auto plan = load_fold_plan(o.fold_plan);
    cv.k = plan.k;
    for (auto a : cv.attributes) plans.emplace(a, plan);
  } else {
    plans = plan_folds(corpus, cv);
  }

  std::ofstream transcript;
  if (!o.transcript.empty()) {
    transcript.open(o.transcript);
    if (!transcript) throw Error("cannot write " + o.transcript);
  }
  std::vector<std::unique_ptr<Backend>> owned;
  for (const auto& b : o.backends) {
    if (b == "heuristic") {
      owned.push_back(std::make_unique<HeuristicBackend>(make_checker(o), marker_mode(o)));
    } else if (b == "forest") {
      auto params = classifier_params(o);
      params.forest.threads = 1;  // folds already run in parallel
      owned.push_back(std::make_unique<ForestBackend>(params));
    } else if (b == "llm") {
      LlmOptions lo;
      lo.retries = o.llm_retries;
      lo.concurrency = o.llm_concurrency;
      lo.marker_mode = marker_mode(o);
      owned.push_back(std::make_unique<LlmBackend>(std::make_shared<HttpChatTransport>(*endpoint), lo,
                                                   o.transcript.empty() ? nullptr : &transcript));
    } else {
      owned.push_back(std::make_unique<AdapterBackend>(split_words(o.adapter_cmd), o.adapter_dir,
                                                       AdapterHyperparameters{}, o.adapter_name));
    }
  }
  std::vector<Backend*> backends;
  for (auto& b : owned) backends.push_back(b.get());

  auto report = cross_validate(backends, corpus, cv, plans);
  report.run_config = run_config(o, "evaluate");

  std::filesystem::create_directories(o.out_dir);
  const std::filesystem::path dir(o.out_dir);
  with_output((dir / "report.json").string(), out, [&](std::ostream& s) { s << report.to_json().dump(2) << "\n"; });
  with_output((dir / "report.md").string(), out, [&](std::ostream& s) { s << render_markdown(report); });
  with_output((dir / "report.csv").string(), out, [&](std::ostream& s) { s << render_csv(report); });

  out << "fold plan " << report.fold_plan_hash() << "\n";
  for (const auto& b : report.backends) {
    out << b.name << ": average BA " << format_percent(b.attribute_average.balanced_accuracy);
    std::size_t failed = 0, fallbacks = 0;
    for (const auto& a : b.attributes) {
      failed += a.failed_folds;
      fallbacks += a.fallbacks;
      out << ", " << to_string(a.attribute) << " " << format_percent(a.average.macro.balanced_accuracy);
    }
    out << "\n";
    if (failed) err << "warning: " << b.name << " failed on " << failed << " fold(s); see report.md\n";
    if (fallbacks) err << "note: " << b.name << " used the fallback verdict " << fallbacks << " time(s)\n";
  }
  out << "wrote " << (dir / "report.md").string() << ", report.csv, report.json\n";
  return 0;
}

int cmd_llm(const Options& o, std::ostream& out) {
  const auto corpus = load_corpus(o.input);
  if (o.prompt_only) {
    for (const auto& inst : corpus.instances) {
      const auto p = build_prompt(inst, preprocess(inst, marker_mode(o)));
      out << nlohmann::json{{"id", inst.id}, {"prompt_hash", p.hash()}, {"prompt", p.text()}}.dump() << "\n";
    }
    return 0;
  }
  HttpChatTransport transport(EndpointConfig::from_env());
  LlmOptions lo;
  lo.retries = o.llm_retries;
  lo.concurrency = o.llm_concurrency;
  lo.marker_mode = marker_mode(o);
  std::ofstream transcript;
  if (!o.transcript.empty()) {
    transcript.open(o.transcript);
    if (!transcript) throw Error("cannot write " + o.transcript);
  }
  const auto verdicts = evaluate_remote(transport, corpus.instances, lo, o.transcript.empty() ? nullptr : &transcript);
  with_output(o.output, out, [&](std::ostream& s) {
    for (const auto& v : verdicts) {
      nlohmann::json j = {{"id", v.id}, {"attempts", v.attempts}, {"fallback", v.fallback},
                          {"raw_response", v.raw_response}};
      for (auto a : kAttributes) j["attributes"][std::string(to_string(a))] = v.verdicts.at(a);
      if (!v.error.empty()) j["error"] = v.error;
      s << j.dump() << "\n";
    }
  });
  return 0;
}

int cmd_kappa(const Options& o, std::ostream& out) {
  const auto a = load_corpus(o.input);
  const auto b = load_corpus(o.second_input);
  std::map<std::string, const ReviewInstance*> by_id;
  for (const auto& inst : b.instances) by_id[inst.id] = &inst;
  std::vector<std::pair<const ReviewInstance*, const ReviewInstance*>> pairs;
  for (const auto& inst : a.instances) {
    const auto it = by_id.find(inst.id);
    if (it == by_id.end()) throw ValidationError("id " + inst.id + " is missing from " + o.second_input);
    pairs.emplace_back(&inst, it->second);
  }
  if (pairs.size() != b.size()) throw ValidationError("annotation files cover different ids");

  auto report = [&](const std::string& name, auto&& get) {
    std::vector<bool> x, y;
    for (const auto& [p, q] : pairs) {
      const auto u = get(*p), v = get(*q);
      if (!u || !v) return;
      x.push_back(*u);
      y.push_back(*v);
    }
    out << name << "\t" << std::fixed << std::setprecision(4) << cohens_kappa(x, y) << "\tn=" << x.size() << "\n";
  };
  for (auto attr : kAttributes) {
    report(std::string(to_string(attr)), [&](const ReviewInstance& i) -> std::optional<bool> {
      if (!i.labeled_for(attr)) throw ValidationError("instance " + i.id + " lacks a " + std::string(to_string(attr)) + " label");
      return i.label(attr);
    });
  }
  for (auto id : kCriteria) {
    report(std::string(to_string(id)), [&](const ReviewInstance& i) -> std::optional<bool> {
      if (!i.labels || !i.labels->criteria) return std::nullopt;
      return i.labels->criteria->at(id);
    });
  }
  return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
  std::ifstream in(o.input);
  if (!in) throw LoadError("cannot open report " + o.input);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed report " + o.input + ": " + e.what());
  }
  const auto report = EvalReport::from_json(j);
  with_output(o.output, out, [&](std::ostream& s) {
    if (o.format == "md") {
      s << render_markdown(report);
    } else if (o.format == "csv") {
      s << render_csv(report);
    } else {
      s << report.to_json().dump(2) << "\n";
    }
  });
  return 0;
}

void add_heuristic_options(CLI::App& app, Options& o) {
  auto* g = "Heuristics";
  app.add_option("--lexicons", o.lexicons, "Directory of lexicon .txt files overriding the bundled lists")->group(g);
  app.add_flag("--strict-markers", o.strict_markers, "Require '-'/'+' in the first column of diff lines")->group(g);
  app.add_option("--informative-min-tokens", o.heuristics.informative_min_tokens, "Token count from which a comment may show a reason through clause structure")->capture_default_str()->group(g);
  app.add_option("--informative-min-clauses", o.heuristics.informative_min_clauses, "Clauses needed to show a reason without a causal marker")->capture_default_str()->group(g);
  app.add_option("--concise-max-tokens", o.heuristics.concise_max_tokens, "Longest comment still counted as concise")->capture_default_str()->group(g);
  app.add_option("--filler-run", o.heuristics.filler_run, "Run of filler or repeated words that breaks conciseness")->capture_default_str()->group(g);
  app.add_option("--min-printable-ratio", o.heuristics.min_printable_ratio, "Minimum share of printable characters for readable format")->capture_default_str()->group(g);
  app.add_option("--repeated-char-run", o.heuristics.repeated_char_run, "Repeated letters that mark a word as misspelled")->capture_default_str()->group(g);
  app.add_flag("--allow-lowercase-start", o.heuristics.allow_lowercase_start, "Accept sentences starting in lowercase")->group(g);
  app.add_flag("--no-quote-fence", o.no_quote_fence, "Do not treat quoted spans as code fences")->group(g);
  app.add_flag("--force-understanding-false", o.heuristics.force_understanding_false,
               "Report R.O2 as unmet for every comment")->group(g);
}

void add_model_options(CLI::App& sub, Options& o) {
  auto* g = "Model";
  sub.add_option("--trees", o.forest.trees, "Number of trees")->capture_default_str()->group(g);
  sub.add_option("--max-depth", o.forest.max_depth, "Maximum tree depth, 0 for unlimited")->capture_default_str()->group(g);
  sub.add_option("--min-leaf", o.forest.min_leaf, "Minimum bootstrap weight per leaf")->capture_default_str()->group(g);
  sub.add_option("--feature-fraction", o.forest.feature_fraction, "Features per split as a fraction; 0 uses sqrt")
      ->capture_default_str()->group(g);
  sub.add_option("--min-frequency", o.features.min_frequency, "Minimum document frequency of a vocabulary term")->capture_default_str()->group(g);
  sub.add_option("--max-vocabulary", o.features.max_vocabulary, "Cap on token terms")->capture_default_str()->group(g);
  sub.add_flag("--no-bigrams", o.no_bigrams, "Unigram terms only")->group(g);
  sub.add_flag("--no-checker-features", o.no_checker_features, "Drop the criterion checker columns")->group(g);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Code review comment clarity toolkit", "crc-clarity"};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--jobs,-j", o.jobs, "Parallel workers, 0 for all cores")->capture_default_str();
  add_heuristic_options(app, o);
  app.footer(
      "Environment:\n"
      "  CRC_LLM_ENDPOINT  chat-completions URL used by `llm` and `evaluate --backend llm`\n"
      "  CRC_LLM_API_KEY   bearer token, optional\n"
      "  CRC_LLM_MODEL     model name sent with each request, optional\n"
      "Exit codes: 0 success, 1 validation or usage error, 2 runtime or backend error.");

  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL corpus and optionally rewrite it canonically");
  ingest->add_option("corpus", o.input)->required();
  ingest->add_option("-o,--output", o.output, "Canonical JSONL output");

  auto* sample_size = app.add_subcommand("sample-size", "Required sample size for a population");
  sample_size->add_option("population", o.population)->required();
  sample_size->add_option("--confidence", o.confidence)->capture_default_str();
  sample_size->add_option("--margin", o.margin)->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Per-language random sample sized by sample-size");
  sample->add_option("corpus", o.input)->required();
  sample->add_option("-o,--output", o.output, "Sampled JSONL output, stdout if omitted");
  sample->add_option("--confidence", o.confidence)->capture_default_str();
  sample->add_option("--margin", o.margin)->capture_default_str();

  auto* split = app.add_subcommand("split", "Write a k-fold plan");
  split->add_option("corpus", o.input)->required();
  split->add_option("-o,--output", o.output, "Fold plan JSON");
  split->add_option("-k", o.k, "Number of folds")->capture_default_str();
  split->add_option("--stratify-on", o.stratify_on, "Balance negatives of this attribute across folds");

  auto* stats = app.add_subcommand("stats", "Label distribution table");
  stats->add_option("corpus", o.input)->required();
  stats->add_flag("--per-language", o.per_language);

  auto* pre = app.add_subcommand("preprocess", "Print normalized diffs and fused inputs as JSONL");
  pre->add_option("corpus", o.input)->required();
  pre->add_option("-o,--output", o.output);

  auto* crit = app.add_subcommand("criteria", "Print the criteria catalog as JSON");

  auto* train = app.add_subcommand("train", "Train a random-forest model for one attribute");
  train->add_option("corpus", o.input)->required();
  train->add_option("-a,--attribute", o.attribute, "relevance, informativeness or expression")->required();
  train->add_option("-o,--output", o.output, "Model file")->required();
  train->add_flag("--no-upsample", o.no_upsample, "Train on the original class balance");
  add_model_options(*train, o);

  auto* predict = app.add_subcommand("predict", "Predict verdicts for a JSONL file");
  predict->add_option("instances", o.input)->required();
  predict->add_option("-b,--backend", o.backend, "heuristic or forest")->capture_default_str();
  predict->add_option("-m,--model", o.models, "Model file from `train`; repeat for several attributes");
  predict->add_flag("--explain", o.explain, "Name the criteria behind each heuristic verdict");

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate backends on a labeled corpus");
  evaluate->add_option("corpus", o.input)->required();
  evaluate->add_option("-b,--backend", o.backends, "heuristic, forest, llm or adapter; repeatable")->required();
  evaluate->add_option("-o,--out-dir", o.out_dir, "Directory for report.md, report.csv and report.json")
      ->capture_default_str();
  evaluate->add_option("-k", o.k, "Number of folds")->capture_default_str();
  evaluate->add_option("--fold-plan", o.fold_plan, "Reuse a plan written by `split`");
  evaluate->add_flag("--stratify", o.stratify, "Label-stratified folds, one plan per attribute");
  evaluate->add_flag("--no-upsample", o.no_upsample, "Skip negative up-sampling of training slices");
  evaluate->add_option("--adapter-cmd", o.adapter_cmd, "Command line of an external model adapter");
  evaluate->add_option("--adapter-name", o.adapter_name)->capture_default_str();
  evaluate->add_option("--adapter-dir", o.adapter_dir, "Where adapter models are stored")->capture_default_str();
  evaluate->add_option("--llm-retries", o.llm_retries, "Extra attempts after an invalid or failed response")->capture_default_str();
  evaluate->add_option("--llm-concurrency", o.llm_concurrency, "Requests in flight")->capture_default_str();
  evaluate->add_option("--transcript", o.transcript, "JSONL log of LLM calls");
  add_model_options(*evaluate, o);

  auto* llm = app.add_subcommand("llm", "Judge comments with a remote chat model");
  llm->add_option("instances", o.input)->required();
  llm->add_option("-o,--output", o.output);
  llm->add_option("--transcript", o.transcript, "JSONL log of calls");
  llm->add_option("--retries", o.llm_retries, "Extra attempts after an invalid or failed response")->capture_default_str();
  llm->add_option("--concurrency", o.llm_concurrency, "Requests in flight")->capture_default_str();
  llm->add_flag("--prompt-only", o.prompt_only, "Print prompts without calling the endpoint");

  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotation files");
  kappa->add_option("first", o.input)->required();
  kappa->add_option("second", o.second_input)->required();

  auto* report = app.add_subcommand("report", "Re-render a report.json");
  report->add_option("report", o.input)->required();
  report->add_option("-f,--format", o.format)->check(CLI::IsMember({"md", "csv", "json"}))->capture_default_str();
  report->add_option("-o,--output", o.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) return cmd_ingest(o, out);
    if (*sample_size) return cmd_sample_size(o, out);
    if (*sample) return cmd_sample(o, out, err);
    if (*split) return cmd_split(o, out);
    if (*stats) return cmd_stats(o, out);
    if (*pre) return cmd_preprocess(o, out);
    if (*crit) return cmd_criteria(out);
    if (*train) return cmd_train(o, out);
    if (*predict) return cmd_predict(o, out);
    if (*evaluate) return cmd_evaluate(o, out, err);
    if (*llm) return cmd_llm(o, out);
    if (*kappa) return cmd_kappa(o, out);
    if (*report) return cmd_report(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace crc
