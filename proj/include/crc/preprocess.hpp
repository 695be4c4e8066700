#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crc/common.hpp"

namespace crc {

inline constexpr std::string_view kDeleteToken = "[DELETE]";
inline constexpr std::string_view kAddToken = "[ADD]";
inline constexpr std::string_view kSepToken = "[SEP]";

// Lenient tolerates whitespace before the '-'/'+' marker.
enum class MarkerMode { Lenient, Strict };

struct NormalizedInput {
  std::string comment;
  std::string normalized_diff;
  std::string fused_text;  // comment + " [SEP] " + normalized_diff
  std::vector<std::string> delete_lines;
  std::vector<std::string> add_lines;
};

/// Keeps only changed lines ('-' or '+'), in order, joined by '\n'.
std::string strip_context(std::string_view diff_hunk,
                          MarkerMode mode = MarkerMode::Lenient);

/// "- old\n+ new" -> "[DELETE] old [ADD] new". Throws ValidationError on a
/// line without a marker.
std::string normalize_markers(std::string_view changed_lines,
                              MarkerMode mode = MarkerMode::Lenient);

NormalizedInput fuse(std::string_view comment, std::string_view normalized_diff);

/// strip_context -> normalize_markers -> fuse. Multi-hunk diffs are handled
/// as one sequence of changed lines in file order.
NormalizedInput preprocess(const ReviewInstance& instance,
                           MarkerMode mode = MarkerMode::Lenient);

/// Lowercased word tokens. Splits on whitespace and punctuation, then on
/// camelCase boundaries; "[DELETE]", "[ADD]" and "[SEP]" stay atomic.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace crc
