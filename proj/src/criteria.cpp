#include "crc/criteria.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>

namespace crc {

namespace detail {
// Generated from data/lexicons/*.txt at configure time.
std::string_view bundled_lexicon(std::string_view name);
}  // namespace detail

namespace {

constexpr std::array<Criterion, kCriterionCount> kCatalog = {{
    {CriterionId::RE1, Attribute::Relevance, CriterionKind::Essential,
     "Relevant to the code change.",
     "The comment concerns the change under review and can be understood from "
     "that change alone, without depending on other comments or outside context."},
    {CriterionId::RO1, Attribute::Relevance, CriterionKind::Optional,
     "Specify the relevant location.",
     "The comment points at the specific code element or line it is about."},
    {CriterionId::RO2, Attribute::Relevance, CriterionKind::Optional,
     "Correctly understand the code change.",
     "The comment demonstrates that the reviewer understood what the change does."},
    {CriterionId::IE1, Attribute::Informativeness, CriterionKind::Essential,
     "Clear intention.",
     "The comment makes the expected follow-up evident: it asks a question that "
     "needs an answer, identifies a problem to fix, or offers a suggestion, "
     "possibly non-blocking."},
    {CriterionId::IE2, Attribute::Informativeness, CriterionKind::Essential,
     "Provide reason or context information.",
     "The comment explains the point behind its question, what the problem is, "
     "or why the suggestion is made."},
    {CriterionId::IO1, Attribute::Informativeness, CriterionKind::Optional,
     "Provide suggestions for the next step.",
     "The comment proposes what to do next when such a proposal is available."},
    {CriterionId::IO2, Attribute::Informativeness, CriterionKind::Optional,
     "Provide reference information.",
     "The comment links or cites material useful to the author, such as "
     "documentation, guidelines or related code."},
    {CriterionId::EE1, Attribute::Expression, CriterionKind::Essential,
     "Concise and to-the-point.",
     "The idea is stated precisely and briefly, without vague, ambiguous or "
     "incoherent wording."},
    {CriterionId::EE2, Attribute::Expression, CriterionKind::Essential,
     "Polite and objective.",
     "The tone is polite and the comment addresses the code, not the person."},
    {CriterionId::EO1, Attribute::Expression, CriterionKind::Optional,
     "Readable format.",
     "The comment is formatted for human readers, with code fragments set apart "
     "(for example in backticks)."},
    {CriterionId::EO2, Attribute::Expression, CriterionKind::Optional,
     "Proper syntax and grammar.",
     "The comment uses correct syntax and grammar and is free of typos and "
     "truncated words."},
}};

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// " w1 w2 w3 " over lowercase [a-z0-9'] runs, for whole-word phrase search.
std::string phrase_space(std::string_view text) {
  const auto s = replace_all(to_lower(text), "\xE2\x80\x99", "'");
  std::string out = " ";
  bool in_word = false;
  for (char c : s) {
    if (is_alnum(c) || c == '\'') {
      out += c;
      in_word = true;
    } else if (in_word) {
      out += ' ';
      in_word = false;
    }
  }
  if (in_word) out += ' ';
  return out;
}

bool contains_phrase(const std::string& spaced, const std::vector<std::string>& phrases) {
  return std::any_of(phrases.begin(), phrases.end(), [&](const std::string& p) {
    return spaced.find(p) != std::string::npos;
  });
}

std::vector<std::string> parse_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string_view v = line;
    while (!v.empty() && is_space(v.front())) v.remove_prefix(1);
    while (!v.empty() && is_space(v.back())) v.remove_suffix(1);
    if (!v.empty()) out.push_back(to_lower(v));
  }
  return out;
}

std::unordered_set<std::string> as_set(const std::vector<std::string>& lines) {
  return {lines.begin(), lines.end()};
}

std::vector<std::string> as_phrases(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    auto p = phrase_space(l);
    if (p.size() > 2) out.push_back(std::move(p));
  }
  return out;
}

std::shared_ptr<const Lexicons> build_lexicons(
    const std::function<std::string(std::string_view)>& source) {
  auto lex = std::make_shared<Lexicons>();
  auto lines = [&](std::string_view name) { return parse_lines(source(name)); };
  lex->stopwords = as_set(lines("stopwords"));
  lex->english_words = as_set(lines("english_words"));
  lex->technical_words = as_set(lines("technical_words"));
  lex->imperative_verbs = as_set(lines("imperative_verbs"));
  lex->offensive_terms = as_set(lines("offensive_terms"));
  lex->filler_words = as_set(lines("filler_words"));
  lex->suggestion_phrases = as_phrases(lines("suggestion_phrases"));
  lex->causal_markers = as_phrases(lines("causal_markers"));
  lex->doc_citation_phrases = as_phrases(lines("doc_citation_phrases"));
  lex->accusation_patterns = as_phrases(lines("accusation_patterns"));
  lex->positional_phrases = as_phrases(lines("positional_phrases"));
  return lex;
}

// Contents of `...`, ```...``` and (optionally) quoted spans, plus the
// comment text with those spans blanked out.
struct Spans {
  std::vector<std::string> quoted;
  std::string unfenced;
};

Spans extract_spans(std::string_view text, bool quotes) {
  Spans spans;
  spans.unfenced.assign(text);
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) spans.unfenced[i] = ' ';
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i).starts_with("```")) {
      const auto end = text.find("```", i + 3);
      const auto stop = end == std::string_view::npos ? text.size() : end + 3;
      spans.quoted.emplace_back(text.substr(i + 3, (end == std::string_view::npos ? text.size() : end) - i - 3));
      blank(i, stop);
      i = stop;
      continue;
    }
    const char c = text[i];
    const bool quote_char = c == '`' || (quotes && (c == '\'' || c == '"'));
    const bool opens = quote_char && (c == '`' || i == 0 || !is_alnum(text[i - 1]));
    if (opens) {
      std::size_t j = i + 1;
      for (; j < text.size() && text[j] != '\n'; ++j) {
        if (text[j] != c) continue;
        if (c == '`' || j + 1 == text.size() || !is_alnum(text[j + 1])) break;
      }
      if (j < text.size() && text[j] == c && j > i + 1) {
        spans.quoted.emplace_back(text.substr(i + 1, j - i - 1));
        blank(i, j + 1);
        i = j + 1;
        continue;
      }
    }
    ++i;
  }
  return spans;
}

std::string_view trim_punct(std::string_view w) {
  auto edge = [](char c) {
    return !(is_alnum(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80);
  };
  while (!w.empty() && edge(w.front())) w.remove_prefix(1);
  while (!w.empty() && edge(w.back())) w.remove_suffix(1);
  return w;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

// Looks like an identifier or expression rather than an English word.
bool code_like(std::string_view w) {
  if (w.empty()) return false;
  bool has_lower = false;
  bool inner_upper = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const char c = w[i];
    if (is_digit(c)) return true;
    if (std::string_view("_.()[]{}=<>:/\\#@$&*|;+~^%").find(c) != std::string_view::npos) return true;
    if (is_lower(c)) has_lower = true;
    if (i > 0 && is_upper(c)) inner_upper = true;
  }
  if (inner_upper && has_lower) return true;  // camelCase
  if (!has_lower && w.size() >= 2 && std::all_of(w.begin(), w.end(), is_alpha)) return true;  // ACRONYM
  return false;
}

bool code_syntax(std::string_view w) {
  static constexpr std::array<std::string_view, 10> marks = {
      "()", "->", "::", "==", "!=", "&&", "||", ";", "{", "}"};
  for (auto m : marks) {
    if (w.find(m) != std::string_view::npos) return true;
  }
  const auto eq = w.find('=');
  if (eq != std::string_view::npos && eq > 0 && eq + 1 < w.size()) return true;
  const auto open = w.find('(');
  if (open != std::string_view::npos && open > 0 && w.find(')', open) != std::string_view::npos) return true;
  const auto bracket = w.find('[');
  if (bracket != std::string_view::npos && bracket > 0 && w.find(']', bracket) != std::string_view::npos) return true;
  return false;
}

std::size_t printable_count(std::string_view s, std::size_t& total) {
  std::size_t printable = 0;
  total = 0;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    bool ok = false;
    if (c < 0x80) {
      ok = (c >= 0x20 && c < 0x7F) || c == '\n' || c == '\t' || c == '\r';
    } else {
      len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 1;
      ok = c >= 0xC0 && i + len <= s.size();
      for (std::size_t k = 1; ok && k < len; ++k) {
        ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
      }
      // U+FFFD replacement character
      if (ok && s.substr(i, 3) == "\xEF\xBF\xBD") ok = false;
      if (!ok) len = 1;
    }
    ++total;
    if (ok) ++printable;
    i += len;
  }
  return printable;
}

bool is_abbreviation(std::string_view word) {
  static const std::unordered_set<std::string> abbrevs = {
      "e.g", "i.e", "etc", "vs", "cf", "approx", "incl", "resp", "mr", "ms", "dr"};
  return abbrevs.count(to_lower(trim_punct(word))) != 0;
}

// Sentence start offsets: 0 and every position after [.!?] + whitespace,
// except after common abbreviations.
std::vector<std::size_t> sentence_starts(std::string_view text) {
  std::vector<std::size_t> starts;
  std::size_t i = 0;
  while (i < text.size() && is_space(text[i])) ++i;
  if (i < text.size()) starts.push_back(i);
  for (std::size_t p = i; p + 1 < text.size(); ++p) {
    if ((text[p] != '.' && text[p] != '!' && text[p] != '?') || !is_space(text[p + 1])) continue;
    std::size_t w = p;
    while (w > 0 && !is_space(text[w - 1])) --w;
    if (text[p] == '.' && is_abbreviation(text.substr(w, p - w + 1))) continue;
    std::size_t q = p + 1;
    while (q < text.size() && is_space(text[q])) ++q;
    if (q < text.size()) starts.push_back(q);
  }
  return starts;
}

std::string first_word_at(std::string_view text, std::size_t pos) {
  std::size_t j = pos;
  while (j < text.size() && !is_space(text[j])) ++j;
  return std::string(text.substr(pos, j - pos));
}

// Literal prefilters for the reference patterns below. Each one tests a
// condition that any match requires, so a false result skips the regex.
bool contains_icase(std::string_view s, std::string_view needle) {
  return std::search(s.begin(), s.end(), needle.begin(), needle.end(), [](char a, char b) {
           return std::tolower(static_cast<unsigned char>(a)) == b;
         }) != s.end();
}

bool followed_by_digit(std::string_view s, char c) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == c && std::isdigit(static_cast<unsigned char>(s[i + 1]))) return true;
  }
  return false;
}

bool maybe_url(std::string_view s) { return contains_icase(s, "http") || contains_icase(s, "www."); }

bool maybe_line_ref(std::string_view s) {
  return contains_icase(s, "line") || contains_icase(s, "#l") || followed_by_digit(s, ':');
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

const std::array<Criterion, kCriterionCount>& criteria_catalog() { return kCatalog; }

const Criterion& criterion(CriterionId id) { return kCatalog[static_cast<std::size_t>(id)]; }

std::vector<CriterionId> criteria_of(Attribute attribute) {
  std::vector<CriterionId> out;
  for (const auto& c : kCatalog) {
    if (c.attribute == attribute) out.push_back(c.id);
  }
  return out;
}

nlohmann::json catalog_to_json() {
  auto doc = nlohmann::json::array();
  for (const auto& c : kCatalog) {
    doc.push_back({{"id", to_string(c.id)},
                   {"attribute", to_string(c.attribute)},
                   {"kind", to_string(c.kind)},
                   {"title", c.title},
                   {"description", c.description}});
  }
  return doc;
}

bool aggregate(Attribute attribute, const CriterionVerdicts& verdicts) {
  bool essentials = true;
  bool any_optional = false;
  for (const auto& c : kCatalog) {
    if (c.attribute != attribute) continue;
    const auto it = verdicts.find(c.id);
    if (it == verdicts.end()) {
      throw ValidationError("missing criterion " + std::string(to_string(c.id)));
    }
    if (c.kind == CriterionKind::Essential) {
      essentials = essentials && it->second;
    } else {
      any_optional = any_optional || it->second;
    }
  }
  return essentials && any_optional;
}

AttributeVerdicts aggregate(const CriterionVerdicts& verdicts) {
  AttributeVerdicts out;
  for (auto a : kAttributes) out[a] = aggregate(a, verdicts);
  return out;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Lexicons> Lexicons::bundled() {
  static const auto instance = build_lexicons(
      [](std::string_view name) { return std::string(detail::bundled_lexicon(name)); });
  return instance;
}

std::shared_ptr<const Lexicons> Lexicons::from_directory(const std::filesystem::path& dir) {
  return build_lexicons([&](std::string_view name) {
    const auto file = dir / (std::string(name) + ".txt");
    std::ifstream in(file);
    if (!in) return std::string(detail::bundled_lexicon(name));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  });
}

struct HeuristicChecker::Context {
  std::string comment;
  std::string spaced;  // phrase_space(comment)
  std::vector<std::string> tokens;
  std::unordered_set<std::string> diff_tokens;
  std::string changed_text;
  std::unordered_set<std::string> diff_identifiers;  // lowercase
  Spans spans;
  std::vector<std::string> words;  // whitespace words outside fenced spans
};

HeuristicChecker::HeuristicChecker(HeuristicConfig config,
                                   std::shared_ptr<const Lexicons> lexicons)
    : config_(config),
      lexicons_(std::move(lexicons)),
      line_ref_(R"((\bline\s*#?\s*\d+\b)|(\blines\s+\d+)|(#L\d+)|(\b\w+\.\w+:\d+\b))",
                std::regex::icase),
      url_(R"((https?://\S+)|(\bwww\.\S+))", std::regex::icase),
      issue_ref_(R"(((^|\s)#\d+\b)|(\bgh-\d+\b)|(\b(issue|pr|pull request|bug|ticket)\s*#?\d+\b))",
                 std::regex::icase),
      tracker_ref_(R"(\b[A-Z][A-Z0-9]+-\d+\b)") {}

HeuristicChecker::Context HeuristicChecker::analyze(const NormalizedInput& input) const {
  Context ctx;
  ctx.comment = input.comment;
  ctx.spaced = phrase_space(input.comment);
  ctx.tokens = tokenize(input.comment);
  for (const auto& lines : {input.delete_lines, input.add_lines}) {
    for (const auto& l : lines) {
      ctx.changed_text += l;
      ctx.changed_text += '\n';
    }
  }
  for (auto& t : tokenize(ctx.changed_text)) ctx.diff_tokens.insert(std::move(t));
  for (std::size_t i = 0; i < ctx.changed_text.size();) {
    const char c = ctx.changed_text[i];
    if (!(is_alpha(c) || c == '_')) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < ctx.changed_text.size() && (is_alnum(ctx.changed_text[j]) || ctx.changed_text[j] == '_')) ++j;
    ctx.diff_identifiers.insert(to_lower(std::string_view(ctx.changed_text).substr(i, j - i)));
    i = j;
  }
  ctx.spans = extract_spans(input.comment, config_.quotes_count_as_fence);
  ctx.words = split_ws(ctx.spans.unfenced);
  return ctx;
}

bool HeuristicChecker::check(CriterionId id, const ReviewInstance&,
                             const NormalizedInput& input) const {
  return check(id, analyze(input));
}

CriterionVerdicts HeuristicChecker::check_all(const ReviewInstance&,
                                              const NormalizedInput& input) const {
  const auto ctx = analyze(input);
  CriterionVerdicts out;
  for (auto id : kCriteria) out[id] = check(id, ctx);
  return out;
}

ClarityVerdict HeuristicChecker::evaluate(const ReviewInstance& instance,
                                          const NormalizedInput& input) const {
  ClarityVerdict v;
  v.criteria = check_all(instance, input);
  v.attributes = aggregate(*v.criteria);
  return v;
}

bool HeuristicChecker::check(CriterionId id, const Context& ctx) const {
  switch (id) {
    case CriterionId::RE1: return relevant_to_change(ctx);
    case CriterionId::RO1: return specifies_location(ctx);
    case CriterionId::RO2: return !config_.force_understanding_false;
    case CriterionId::IE1: return clear_intention(ctx);
    case CriterionId::IE2: return provides_reason(ctx);
    case CriterionId::IO1: return suggests_next_step(ctx);
    case CriterionId::IO2: return provides_reference(ctx);
    case CriterionId::EE1: return concise(ctx);
    case CriterionId::EE2: return polite(ctx);
    case CriterionId::EO1: return readable_format(ctx);
    case CriterionId::EO2: return proper_grammar(ctx);
  }
  return false;
}

namespace {

bool quoted_span_in_diff(const std::vector<std::string>& quoted, const std::string& changed) {
  return std::any_of(quoted.begin(), quoted.end(), [&](const std::string& q) {
    const auto t = trim_punct(q);
    return t.size() >= 2 && changed.find(t) != std::string::npos;
  });
}

}  // namespace

bool HeuristicChecker::relevant_to_change(const Context& ctx) const {
  for (const auto& t : ctx.tokens) {
    if (t.size() < 2 || t.front() == '[' || lexicons_->stopwords.count(t)) continue;
    if (ctx.diff_tokens.count(t)) return true;
  }
  return quoted_span_in_diff(ctx.spans.quoted, ctx.changed_text);
}

bool HeuristicChecker::specifies_location(const Context& ctx) const {
  if (maybe_line_ref(ctx.comment) && std::regex_search(ctx.comment, line_ref_)) return true;
  if (quoted_span_in_diff(ctx.spans.quoted, ctx.changed_text)) return true;
  if (!contains_phrase(ctx.spaced, lexicons_->positional_phrases)) return false;
  return std::any_of(ctx.words.begin(), ctx.words.end(), [&](const std::string& w) {
    const auto lw = to_lower(trim_punct(w));
    return lw.size() >= 3 && !lexicons_->stopwords.count(lw) && ctx.diff_identifiers.count(lw);
  });
}

bool HeuristicChecker::clear_intention(const Context& ctx) const {
  if (ctx.comment.find('?') != std::string::npos) return true;
  if (contains_phrase(ctx.spaced, lexicons_->suggestion_phrases)) return true;
  for (auto start : sentence_starts(ctx.comment)) {
    const auto w = to_lower(trim_punct(first_word_at(ctx.comment, start)));
    if (lexicons_->imperative_verbs.count(w)) return true;
  }
  return false;
}

bool HeuristicChecker::provides_reason(const Context& ctx) const {
  if (contains_phrase(ctx.spaced, lexicons_->causal_markers)) return true;
  if (ctx.tokens.size() < config_.informative_min_tokens) return false;
  // Clauses: segments between punctuation or coordinating conjunctions that
  // carry at least two words.
  std::size_t clauses = 0;
  std::size_t words = 0;
  auto close = [&] {
    if (words >= 2) ++clauses;
    words = 0;
  };
  for (const auto& raw : split_ws(ctx.comment)) {
    const auto lw = to_lower(trim_punct(raw));
    if (lw == "and" || lw == "but" || lw == "or" || lw == "then") {
      close();
      continue;
    }
    if (!lw.empty()) ++words;
    if (!raw.empty() && std::string_view(".,;:!?").find(raw.back()) != std::string_view::npos) close();
  }
  close();
  return clauses >= config_.informative_min_clauses;
}

bool HeuristicChecker::suggests_next_step(const Context& ctx) const {
  if (ctx.spaced.find(" instead ") != std::string::npos) return true;
  if (!contains_phrase(ctx.spaced, lexicons_->suggestion_phrases)) return false;
  if (!ctx.spans.quoted.empty()) return true;
  return std::any_of(ctx.words.begin(), ctx.words.end(), [&](const std::string& w) {
    const auto t = trim_punct(w);
    const auto lw = to_lower(t);
    return code_like(t) ||
           (lw.size() >= 3 && !lexicons_->stopwords.count(lw) && ctx.diff_identifiers.count(lw));
  });
}

bool HeuristicChecker::provides_reference(const Context& ctx) const {
  const std::string_view c = ctx.comment;
  return (maybe_url(c) && std::regex_search(ctx.comment, url_)) ||
         (has_digit(c) && std::regex_search(ctx.comment, issue_ref_)) ||
         (followed_by_digit(c, '-') && std::regex_search(ctx.comment, tracker_ref_)) ||
         contains_phrase(ctx.spaced, lexicons_->doc_citation_phrases);
}

bool HeuristicChecker::concise(const Context& ctx) const {
  if (ctx.tokens.size() > config_.concise_max_tokens) return false;
  std::size_t filler = 0;
  std::size_t repeat = 1;
  for (std::size_t i = 0; i < ctx.tokens.size(); ++i) {
    filler = lexicons_->filler_words.count(ctx.tokens[i]) ? filler + 1 : 0;
    repeat = (i > 0 && ctx.tokens[i] == ctx.tokens[i - 1]) ? repeat + 1 : 1;
    if (filler >= config_.filler_run || repeat >= config_.filler_run) return false;
  }
  return true;
}

bool HeuristicChecker::polite(const Context& ctx) const {
  for (const auto& t : ctx.tokens) {
    if (lexicons_->offensive_terms.count(t)) return false;
  }
  return !contains_phrase(ctx.spaced, lexicons_->accusation_patterns);
}

bool HeuristicChecker::readable_format(const Context& ctx) const {
  std::size_t total = 0;
  const auto printable = printable_count(ctx.comment, total);
  if (total > 0 &&
      static_cast<double>(printable) / static_cast<double>(total) < config_.min_printable_ratio) {
    return false;
  }
  return std::none_of(ctx.words.begin(), ctx.words.end(), [&](const std::string& w) {
    return !(maybe_url(w) && std::regex_search(w, url_)) && code_syntax(w);
  });
}

bool HeuristicChecker::is_dictionary_word(std::string_view w) const {
  const auto& lex = *lexicons_;
  auto known = [&](const std::string& s) {
    return lex.english_words.count(s) || lex.technical_words.count(s) || lex.stopwords.count(s);
  };
  const std::string word(w);
  if (known(word)) return true;
  auto ends = [&](std::string_view suf) { return word.size() > suf.size() + 1 && word.ends_with(suf); };
  auto stem = [&](std::size_t cut, std::string_view add = {}) {
    return known(word.substr(0, word.size() - cut) + std::string(add));
  };
  auto doubled = [&](std::size_t cut) {
    const auto base = word.substr(0, word.size() - cut);
    return base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2] &&
           known(base.substr(0, base.size() - 1));
  };
  if (ends("ies") && stem(3, "y")) return true;
  if (ends("es") && stem(2)) return true;
  if (ends("s") && stem(1)) return true;
  if (ends("ied") && stem(3, "y")) return true;
  if (ends("ed") && (stem(2) || stem(1) || doubled(2))) return true;
  if (ends("ing") && (stem(3) || stem(3, "e") || doubled(3))) return true;
  if (ends("ly") && (stem(2) || (ends("ily") && stem(3, "y")))) return true;
  if (ends("er") && (stem(2) || stem(1))) return true;
  if (ends("est") && (stem(3) || stem(2))) return true;
  return false;
}

bool HeuristicChecker::proper_grammar(const Context& ctx) const {
  const auto is_identifier = [&](std::string_view w) {
    return code_like(w) || ctx.diff_identifiers.count(to_lower(w));
  };

  if (!config_.allow_lowercase_start) {
    for (auto start : sentence_starts(ctx.comment)) {
      const char c = ctx.comment[start];
      if (!is_lower(c)) continue;
      if (!is_identifier(trim_punct(first_word_at(ctx.comment, start)))) return false;
    }
  }

  for (const auto& raw : ctx.words) {
    const auto w = trim_punct(raw);
    if (w.empty() || is_identifier(w) || (maybe_url(raw) && std::regex_search(raw, url_))) continue;
    std::size_t run = 1;
    for (std::size_t i = 1; i < w.size(); ++i) {
      run = (is_alpha(w[i]) && std::tolower(w[i]) == std::tolower(w[i - 1])) ? run + 1 : 1;
      if (run >= config_.repeated_char_run) return false;
    }
    // Hyphenated and slash-joined words are checked part by part.
    std::string part;
    auto check_part = [&](std::string p) {
      p = replace_all(std::move(p), "\xE2\x80\x99", "'");
      if (p.empty()) return true;
      std::string lw = to_lower(p);
      for (std::string_view suffix : {"n't", "'s", "'re", "'ll", "'ve", "'d", "'m"}) {
        if (lw.size() > suffix.size() && lw.ends_with(suffix)) {
          lw.resize(lw.size() - suffix.size());
          if (suffix == "n't") {
            if (lw == "ca") lw = "can";
            else if (lw == "wo") lw = "will";
            else if (lw == "sha") lw = "shall";
          }
          break;
        }
      }
      if (lw.empty() || !std::all_of(lw.begin(), lw.end(), is_alpha)) return true;
      return is_dictionary_word(lw);
    };
    for (char c : w) {
      if (c == '-' || c == '/') {
        if (!check_part(part)) return false;
        part.clear();
      } else {
        part += c;
      }
    }
    if (!check_part(part)) return false;
  }
  return true;
}

bool check(CriterionId id, const ReviewInstance& instance, const NormalizedInput& input) {
  static const HeuristicChecker checker;
  return checker.check(id, instance, input);
}

}  // namespace crc
