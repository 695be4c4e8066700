#include "crc/preprocess.hpp"

#include <array>
#include <cctype>

namespace crc {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool is_blank(char c) { return c == ' ' || c == '\t'; }

// Position of the marker character, or npos when the line is unmarked.
std::size_t marker_pos(std::string_view line, MarkerMode mode) {
  std::size_t i = 0;
  if (mode == MarkerMode::Lenient) {
    while (i < line.size() && is_blank(line[i])) ++i;
  }
  if (i < line.size() && (line[i] == '-' || line[i] == '+')) return i;
  return std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

void push_lower(std::vector<std::string>& out, std::string_view piece) {
  std::string s(piece);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  out.push_back(std::move(s));
}

// "HTTPServerError" -> HTTP|Server|Error, "fooBar" -> foo|Bar.
void split_camel(std::string_view word, std::vector<std::string>& out) {
  auto upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  std::size_t start = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    const bool boundary =
        (upper(word[i]) && lower(word[i - 1])) ||
        (upper(word[i]) && upper(word[i - 1]) && i + 1 < word.size() && lower(word[i + 1]));
    if (boundary) {
      push_lower(out, word.substr(start, i - start));
      start = i;
    }
  }
  push_lower(out, word.substr(start));
}

constexpr std::array<std::string_view, 3> kAtomic = {kDeleteToken, kAddToken, kSepToken};

}  // namespace

std::string strip_context(std::string_view diff_hunk, MarkerMode mode) {
  std::string out;
  for (auto line : split_lines(diff_hunk)) {
    if (marker_pos(line, mode) == std::string_view::npos) continue;
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

std::string normalize_markers(std::string_view changed_lines, MarkerMode mode) {
  std::string out;
  if (changed_lines.empty()) return out;
  for (auto line : split_lines(changed_lines)) {
    const auto pos = marker_pos(line, mode);
    if (pos == std::string_view::npos) {
      throw ValidationError("unmarked line: '" + std::string(line) + "'");
    }
    const auto marker = line[pos] == '-' ? kDeleteToken : kAddToken;
    const auto content = trim(line.substr(pos + 1));
    if (!out.empty()) out += ' ';
    out += marker;
    if (!content.empty()) {
      out += ' ';
      out += content;
    }
  }
  return out;
}

NormalizedInput fuse(std::string_view comment, std::string_view normalized_diff) {
  NormalizedInput in;
  in.comment = std::string(comment);
  in.normalized_diff = std::string(normalized_diff);
  in.fused_text = in.comment + " " + std::string(kSepToken) + " " + in.normalized_diff;

  // Recover the per-line lists by scanning for marker tokens.
  std::vector<std::string>* current = nullptr;
  std::string buffer;
  auto flush = [&] {
    if (current) current->push_back(std::string(trim(buffer)));
    buffer.clear();
  };
  std::size_t i = 0;
  while (i < normalized_diff.size()) {
    const auto rest = normalized_diff.substr(i);
    const bool at_boundary = i == 0 || normalized_diff[i - 1] == ' ';
    if (at_boundary && rest.starts_with(kDeleteToken)) {
      flush();
      current = &in.delete_lines;
      i += kDeleteToken.size();
    } else if (at_boundary && rest.starts_with(kAddToken)) {
      flush();
      current = &in.add_lines;
      i += kAddToken.size();
    } else {
      buffer += normalized_diff[i++];
    }
  }
  flush();
  return in;
}

NormalizedInput preprocess(const ReviewInstance& instance, MarkerMode mode) {
  return fuse(instance.comment,
              normalize_markers(strip_context(instance.diff_hunk, mode), mode));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    if (text[i] == '[') {
      for (auto atom : kAtomic) {
        if (text.substr(i).starts_with(atom)) {
          tokens.emplace_back(atom);
          i += atom.size();
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    split_camel(text.substr(i, j - i), tokens);
    i = j;
  }
  return tokens;
}

}  // namespace crc
