#include "crc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "crc/criteria.hpp"
#include "crc/rng.hpp"

namespace crc {
namespace {

using nlohmann::json;

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

const std::string& require_string(const json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end()) {
    throw LoadError(std::string("missing field ") + field + at_line(line));
  }
  if (!it->is_string()) {
    throw LoadError(std::string("field ") + field + " must be a string" + at_line(line));
  }
  return it->get_ref<const std::string&>();
}

std::string attribute_key(Attribute a) {
  switch (a) {
    case Attribute::Relevance: return "relevance";
    case Attribute::Informativeness: return "informativeness";
    case Attribute::Expression: return "expression";
  }
  return {};
}

ClarityVerdict parse_labels(const json& labels, std::size_t line) {
  if (!labels.is_object()) throw LoadError("field labels must be an object" + at_line(line));
  ClarityVerdict verdict;
  if (const auto crit = labels.find("criteria"); crit != labels.end()) {
    if (!crit->is_object()) throw LoadError("field labels.criteria must be an object" + at_line(line));
    CriterionVerdicts cv;
    for (const auto& [key, value] : crit->items()) {
      const auto id = parse_criterion(key);
      if (!id) throw LoadError("unknown criterion labels.criteria." + key + at_line(line));
      if (!value.is_boolean()) {
        throw LoadError("field labels.criteria." + key + " must be a boolean" + at_line(line));
      }
      cv[*id] = value.get<bool>();
    }
    for (auto id : kCriteria) {
      if (!cv.count(id)) {
        throw LoadError("missing field labels.criteria." + std::string(to_string(id)) + at_line(line));
      }
    }
    verdict.criteria = std::move(cv);
  }
  for (auto a : kAttributes) {
    const auto key = attribute_key(a);
    const auto it = labels.find(key);
    if (it == labels.end()) {
      if (verdict.criteria) {
        verdict.attributes[a] = aggregate(a, *verdict.criteria);
        continue;
      }
      throw LoadError("missing field labels." + key + at_line(line));
    }
    if (!it->is_boolean()) throw LoadError("field labels." + key + " must be a boolean" + at_line(line));
    verdict.attributes[a] = it->get<bool>();
    if (verdict.criteria && aggregate(a, *verdict.criteria) != verdict.attributes[a]) {
      throw ValidationError("labels." + key + " contradicts its criterion verdicts" + at_line(line));
    }
  }
  return verdict;
}

}  // namespace

ReviewInstance parse_instance(const json& record, std::size_t line) {
  if (!record.is_object()) throw LoadError("record is not a JSON object" + at_line(line));
  ReviewInstance inst;
  inst.id = require_string(record, "id", line);
  inst.language = parse_language(require_string(record, "lang", line));
  inst.diff_hunk = require_string(record, "diff_hunk", line);
  inst.comment = require_string(record, "comment", line);
  if (inst.id.empty()) throw LoadError("empty field id" + at_line(line));
  if (inst.diff_hunk.empty()) throw LoadError("empty field diff_hunk" + at_line(line));
  if (inst.comment.empty()) throw LoadError("empty field comment" + at_line(line));
  if (const auto it = record.find("labels"); it != record.end() && !it->is_null()) {
    inst.labels = parse_labels(*it, line);
  }
  inst.source_line = line;
  return inst;
}

json to_json(const ReviewInstance& instance) {
  json j = {{"id", instance.id},
            {"lang", to_string(instance.language)},
            {"diff_hunk", instance.diff_hunk},
            {"comment", instance.comment}};
  if (instance.labels) {
    json labels = json::object();
    for (const auto& [a, v] : instance.labels->attributes) labels[attribute_key(a)] = v;
    if (instance.labels->criteria) {
      json crit = json::object();
      for (const auto& [c, v] : *instance.labels->criteria) crit[std::string(to_string(c))] = v;
      labels["criteria"] = std::move(crit);
    }
    j["labels"] = std::move(labels);
  }
  return j;
}

Corpus read_corpus(std::istream& in, std::string source) {
  Corpus corpus;
  corpus.source = std::move(source);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw LoadError("malformed JSON" + at_line(line) + ": " + e.what());
    }
    corpus.instances.push_back(parse_instance(record, line));
  }
  validate_corpus(corpus);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open corpus file " + path.string());
  return read_corpus(in, path.string());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& inst : corpus.instances) out << to_json(inst).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_corpus(corpus, out);
}

void validate_corpus(const Corpus& corpus) {
  std::map<std::string_view, std::size_t> seen;
  for (const auto& inst : corpus.instances) {
    if (inst.id.empty() || inst.diff_hunk.empty() || inst.comment.empty()) {
      throw ValidationError("instance '" + inst.id + "' has an empty required field");
    }
    const auto [it, inserted] = seen.emplace(inst.id, inst.source_line);
    if (!inserted) {
      std::string where;
      if (inst.source_line) {
        where = " (lines " + std::to_string(it->second) + " and " +
                std::to_string(inst.source_line) + ")";
      }
      throw ValidationError("duplicate id '" + inst.id + "'" + where);
    }
  }
}

// ---------------------------------------------------------------------------

double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ArgumentError("confidence must be in (0, 1)");
  }
  const double p = 1.0 - (1.0 - confidence) / 2.0;
  // Acklam's rational approximation, refined by Newton steps on the CDF.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p > 1.0 - 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int i = 0; i < 3; ++i) {
    const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    x -= (cdf - p) / pdf;
  }
  return x;
}

std::size_t required_sample_size(std::size_t population, double confidence, double margin) {
  if (population < 1) throw ArgumentError("population must be >= 1");
  if (!(margin > 0.0 && margin < 1.0)) throw ArgumentError("margin must be in (0, 1)");
  const double z = normal_quantile_two_sided(confidence);
  const double n0 = z * z * 0.25 / (margin * margin);
  const double corrected = n0 / (1.0 + (n0 - 1.0) / static_cast<double>(population));
  const auto n = static_cast<std::size_t>(std::ceil(corrected));
  return std::clamp<std::size_t>(n, 1, population);
}

SamplePlan plan_sample(std::size_t population, double confidence, double margin) {
  return {population, confidence, margin, required_sample_size(population, confidence, margin)};
}

Corpus stratified_sample(const Corpus& corpus, double confidence, double margin,
                         std::uint64_t seed) {
  if (corpus.empty()) throw ArgumentError("cannot sample an empty corpus");
  const Rng root(seed, fnv1a64("stratified_sample"));
  std::map<Language, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    strata[corpus.instances[i].language].push_back(i);
  }
  std::vector<bool> keep(corpus.size(), false);
  for (auto& [lang, members] : strata) {
    std::sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
      return corpus.instances[x].id < corpus.instances[y].id;
    });
    auto rng = root.split(to_string(lang));
    rng.shuffle(std::span(members));
    const auto n = required_sample_size(members.size(), confidence, margin);
    for (std::size_t i = 0; i < n; ++i) keep[members[i]] = true;
  }
  Corpus out;
  out.source = corpus.source + " (stratified sample, seed " + std::to_string(seed) + ")";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i]) out.instances.push_back(corpus.instances[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> FoldPlan::fold_ids(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignment) {
    if (f == fold) ids.push_back(id);
  }
  return ids;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const auto& [id, f] : assignment) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldPlan::HeldOut FoldPlan::held_out(int fold) const {
  if (fold < 0 || fold >= k) throw ArgumentError("fold index out of range");
  auto ids = fold_ids(fold);
  Rng(seed, fnv1a64("held_out")).split(static_cast<std::uint64_t>(fold)).shuffle(std::span(ids));
  const auto half = ids.size() / 2;
  HeldOut h;
  h.validation.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half));
  h.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(half), ids.end());
  std::sort(h.validation.begin(), h.validation.end());
  std::sort(h.test.begin(), h.test.end());
  return h;
}

json FoldPlan::to_json() const {
  json assign = json::object();
  for (const auto& [id, f] : assignment) assign[id] = f;
  return {{"k", k}, {"seed", seed}, {"assignment", std::move(assign)}};
}

FoldPlan FoldPlan::from_json(const json& j) {
  FoldPlan plan;
  try {
    plan.k = j.at("k").get<int>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, f] : j.at("assignment").items()) plan.assignment[id] = f.get<int>();
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed fold plan: ") + e.what());
  }
  if (plan.k < 2) throw ValidationError("fold plan k must be >= 2");
  for (const auto& [id, f] : plan.assignment) {
    if (f < 0 || f >= plan.k) throw ValidationError("fold index out of range for id '" + id + "'");
  }
  return plan;
}

std::string FoldPlan::hash() const {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(to_json().dump());
  return out.str();
}

void save_fold_plan(const FoldPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << plan.to_json().dump(2) << '\n';
}

FoldPlan load_fold_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open fold plan " + path.string());
  try {
    return FoldPlan::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw LoadError("malformed fold plan " + path.string() + ": " + e.what());
  }
}

FoldPlan make_folds(const Corpus& corpus, int k, std::uint64_t seed,
                    std::optional<Attribute> stratify_on) {
  if (k < 2) throw ArgumentError("k must be >= 2");
  if (corpus.size() < static_cast<std::size_t>(k)) {
    throw ArgumentError("k = " + std::to_string(k) + " exceeds corpus size " +
                        std::to_string(corpus.size()));
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  Rng rng(seed, fnv1a64("make_folds"));

  std::vector<std::vector<std::string>> groups(1);
  if (stratify_on) {
    groups.assign(2, {});
    for (const auto& inst : corpus.instances) {
      if (!inst.labeled_for(*stratify_on)) {
        throw ArgumentError("instance '" + inst.id + "' lacks a " +
                            std::string(to_string(*stratify_on)) + " label");
      }
      groups[inst.label(*stratify_on) ? 1 : 0].push_back(inst.id);
    }
  } else {
    for (const auto& inst : corpus.instances) groups[0].push_back(inst.id);
  }
  std::size_t next = 0;
  for (auto& ids : groups) {
    std::sort(ids.begin(), ids.end());
    rng.shuffle(std::span(ids));
    for (const auto& id : ids) {
      plan.assignment[id] = static_cast<int>(next % static_cast<std::size_t>(k));
      ++next;
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------

Corpus upsample_negatives(const Corpus& train, Attribute attribute, std::uint64_t seed) {
  std::vector<std::size_t> negatives;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& inst = train.instances[i];
    if (!inst.labeled_for(attribute)) {
      throw ArgumentError("instance '" + inst.id + "' lacks a " +
                          std::string(to_string(attribute)) + " label");
    }
    if (inst.label(attribute)) {
      ++positives;
    } else {
      negatives.push_back(i);
    }
  }
  if (negatives.empty() || negatives.size() == positives) return train;
  if (negatives.size() > positives) {
    throw ArgumentError("negatives outnumber positives; up-sampling only duplicates negatives");
  }
  // Draw from the id-sorted negatives so the result does not depend on the
  // input order.
  std::sort(negatives.begin(), negatives.end(), [&](std::size_t x, std::size_t y) {
    return train.instances[x].id < train.instances[y].id;
  });
  Rng rng(seed, fnv1a64("upsample_negatives"));
  rng = rng.split(to_string(attribute));
  Corpus out = train;
  const auto missing = positives - negatives.size();
  out.instances.reserve(train.size() + missing);
  for (std::size_t i = 0; i < missing; ++i) {
    out.instances.push_back(train.instances[negatives[rng.below(negatives.size())]]);
  }
  return out;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The epsilon absorbs representation error such as 0.125 * 100 = 12.4999...
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

LabelDistribution label_distribution(const Corpus& corpus) {
  std::vector<std::string> unlabeled;
  for (const auto& inst : corpus.instances) {
    const bool ok = inst.labels && std::all_of(kAttributes.begin(), kAttributes.end(),
                                                [&](Attribute a) { return inst.labeled_for(a); });
    if (!ok) unlabeled.push_back(inst.id);
  }
  if (!unlabeled.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unlabeled.size() && i < 20; ++i) {
      list += (i ? ", " : "") + unlabeled[i];
    }
    if (unlabeled.size() > 20) list += ", ...";
    throw ValidationError(std::to_string(unlabeled.size()) + " unlabeled instance(s): " + list);
  }

  struct Counts {
    std::size_t n = 0;
    std::map<Attribute, std::size_t> negative;
    std::size_t all_positive = 0;
  };
  auto add = [](Counts& c, const ReviewInstance& inst) {
    ++c.n;
    for (auto a : kAttributes) c.negative[a] += inst.label(a) ? 0 : 1;
    c.all_positive += inst.labels->all_positive() ? 1 : 0;
  };
  auto row = [](std::string group, const Counts& c) {
    DistributionRow r;
    r.group = std::move(group);
    r.count = c.n;
    const double n = static_cast<double>(c.n);
    for (auto a : kAttributes) {
      const auto it = c.negative.find(a);
      r.negative_pct[a] = c.n ? 100.0 * static_cast<double>(it == c.negative.end() ? 0 : it->second) / n : 0.0;
    }
    r.all_positive_pct = c.n ? 100.0 * static_cast<double>(c.all_positive) / n : 0.0;
    return r;
  };

  std::map<Language, Counts> per_language;
  Counts overall;
  for (const auto& inst : corpus.instances) {
    add(per_language[inst.language], inst);
    add(overall, inst);
  }
  LabelDistribution dist;
  for (auto lang : kLanguages) {
    if (auto it = per_language.find(lang); it != per_language.end()) {
      dist.languages.push_back(row(std::string(to_string(lang)), it->second));
    }
  }
  dist.overall = row("Overall", overall);
  return dist;
}

}  // namespace crc
