#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crc {

// Error hierarchy. The CLI maps ValidationError/ArgumentError to exit code 1
// and everything else to exit code 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct ArgumentError : ValidationError {
  using ValidationError::ValidationError;
};
struct LoadError : ValidationError {
  using ValidationError::ValidationError;
};
struct BackendError : Error {
  using Error::Error;
};

enum class Attribute : std::uint8_t { Relevance, Informativeness, Expression };
inline constexpr std::array<Attribute, 3> kAttributes = {
    Attribute::Relevance, Attribute::Informativeness, Attribute::Expression};

std::string_view to_string(Attribute a);
// Accepts "relevance", "Relevance", "R", ...
Attribute parse_attribute(std::string_view text);

enum class CriterionKind : std::uint8_t { Essential, Optional };
std::string_view to_string(CriterionKind k);

enum class CriterionId : std::uint8_t {
  RE1, RO1, RO2,
  IE1, IE2, IO1, IO2,
  EE1, EE2, EO1, EO2,
};
inline constexpr std::size_t kCriterionCount = 11;
inline constexpr std::array<CriterionId, kCriterionCount> kCriteria = {
    CriterionId::RE1, CriterionId::RO1, CriterionId::RO2, CriterionId::IE1,
    CriterionId::IE2, CriterionId::IO1, CriterionId::IO2, CriterionId::EE1,
    CriterionId::EE2, CriterionId::EO1, CriterionId::EO2};

// "R.E1", "I.O2", ...
std::string_view to_string(CriterionId c);
std::optional<CriterionId> parse_criterion(std::string_view text);

enum class Language : std::uint8_t {
  C, Cpp, CSharp, Golang, Java, JavaScript, PHP, Python, Ruby, Other
};
inline constexpr std::array<Language, 10> kLanguages = {
    Language::C,      Language::Cpp,        Language::CSharp, Language::Golang,
    Language::Java,   Language::JavaScript, Language::PHP,    Language::Python,
    Language::Ruby,   Language::Other};

std::string_view to_string(Language l);
// Case-insensitive; common aliases ("go", "cpp", "js", "py", "cs") accepted.
// Unrecognized names map to Language::Other.
Language parse_language(std::string_view text);

using CriterionVerdicts = std::map<CriterionId, bool>;
using AttributeVerdicts = std::map<Attribute, bool>;

struct ClarityVerdict {
  std::optional<CriterionVerdicts> criteria;
  AttributeVerdicts attributes;

  bool has(Attribute a) const { return attributes.count(a) != 0; }
  bool at(Attribute a) const { return attributes.at(a); }
  bool all_positive() const;
};

struct ReviewInstance {
  std::string id;
  Language language = Language::Other;
  std::string diff_hunk;
  std::string comment;
  std::optional<ClarityVerdict> labels;
  // 1-based line in the source file; 0 when constructed in memory.
  std::size_t source_line = 0;

  bool labeled_for(Attribute a) const { return labels && labels->has(a); }
  bool label(Attribute a) const { return labels->at(a); }
};

struct Corpus {
  std::vector<ReviewInstance> instances;
  std::string source;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
};

}  // namespace crc
