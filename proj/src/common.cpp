#include "crc/common.hpp"

#include <algorithm>
#include <cctype>

namespace crc {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::Relevance: return "Relevance";
    case Attribute::Informativeness: return "Informativeness";
    case Attribute::Expression: return "Expression";
  }
  return "?";
}

Attribute parse_attribute(std::string_view text) {
  const auto t = lower(text);
  if (t == "relevance" || t == "r" || t == "rel") return Attribute::Relevance;
  if (t == "informativeness" || t == "i" || t == "info") return Attribute::Informativeness;
  if (t == "expression" || t == "e" || t == "exp") return Attribute::Expression;
  throw ArgumentError("unknown attribute '" + std::string(text) + "'");
}

std::string_view to_string(CriterionKind k) {
  return k == CriterionKind::Essential ? "Essential" : "Optional";
}

std::string_view to_string(CriterionId c) {
  static constexpr std::array<std::string_view, kCriterionCount> names = {
      "R.E1", "R.O1", "R.O2", "I.E1", "I.E2", "I.O1",
      "I.O2", "E.E1", "E.E2", "E.O1", "E.O2"};
  return names[static_cast<std::size_t>(c)];
}

std::optional<CriterionId> parse_criterion(std::string_view text) {
  for (auto c : kCriteria) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Language l) {
  switch (l) {
    case Language::C: return "C";
    case Language::Cpp: return "C++";
    case Language::CSharp: return "C#";
    case Language::Golang: return "Golang";
    case Language::Java: return "Java";
    case Language::JavaScript: return "JavaScript";
    case Language::PHP: return "PHP";
    case Language::Python: return "Python";
    case Language::Ruby: return "Ruby";
    case Language::Other: return "Other";
  }
  return "Other";
}

Language parse_language(std::string_view text) {
  const auto t = lower(text);
  if (t == "c") return Language::C;
  if (t == "c++" || t == "cpp" || t == "cxx") return Language::Cpp;
  if (t == "c#" || t == "cs" || t == "csharp" || t == ".cs") return Language::CSharp;
  if (t == "golang" || t == "go") return Language::Golang;
  if (t == "java") return Language::Java;
  if (t == "javascript" || t == "js") return Language::JavaScript;
  if (t == "php") return Language::PHP;
  if (t == "python" || t == "py") return Language::Python;
  if (t == "ruby" || t == "rb") return Language::Ruby;
  return Language::Other;
}

bool ClarityVerdict::all_positive() const {
  return std::all_of(kAttributes.begin(), kAttributes.end(), [&](Attribute a) {
    auto it = attributes.find(a);
    return it != attributes.end() && it->second;
  });
}

}  // namespace crc
