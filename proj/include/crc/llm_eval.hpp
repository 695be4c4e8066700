#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "crc/common.hpp"
#include "crc/preprocess.hpp"

namespace crc {

/// Judge prompt split into its sections. The wording is our own
/// reconstruction of the protocol; tests/data/prompt_golden.txt pins it.
struct PromptBundle {
  std::string instruction;
  std::string attributes;
  std::string criteria;
  std::string rule;
  std::string output_template;
  std::string data;
  int max_new_tokens = 32;

  /// Sections in order, separated by blank lines.
  std::string text() const;
  /// FNV-1a of text(), 16 hex digits.
  std::string hash() const;
};

inline constexpr int kPromptVersion = 1;

PromptBundle build_prompt(const ReviewInstance& instance, const NormalizedInput& input);

/// "Relevance: Yes\nInformativeness: No\nExpression: Yes"
std::string render_verdicts(const AttributeVerdicts& verdicts);

struct InvalidOutput {
  std::string raw;
  std::string reason;
};

using ParseResult = std::variant<AttributeVerdicts, InvalidOutput>;

/// Finds "<attribute>: yes|no" for each attribute anywhere in the text,
/// ignoring case and surrounding prose. A template echo such as "Yes/No" is
/// not a verdict. Missing or conflicting verdicts give InvalidOutput.
ParseResult parse_response(std::string_view text);

// ---------------------------------------------------------------------------
// Remote evaluation
// ---------------------------------------------------------------------------

struct EndpointConfig {
  std::string url;  // full chat-completions URL
  std::string api_key;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 32;
  std::chrono::seconds timeout{60};

  /// CRC_LLM_ENDPOINT (required), CRC_LLM_API_KEY, CRC_LLM_MODEL.
  /// Throws ArgumentError if the endpoint is unset.
  static EndpointConfig from_env();
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Returns the assistant message text. Throws BackendError on failure.
  virtual std::string complete(const std::string& prompt, int max_tokens) = 0;
};

/// OpenAI-style chat completions over HTTP(S).
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(EndpointConfig config);
  std::string complete(const std::string& prompt, int max_tokens) override;
  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string origin_;
  std::string path_;
};

/// Request body sent by HttpChatTransport.
nlohmann::json chat_request_body(const EndpointConfig& config, const std::string& prompt, int max_tokens);
/// Extracts choices[0].message.content. Throws BackendError.
std::string chat_response_text(std::string_view body);

struct LlmOptions {
  int retries = 2;  // extra attempts after the first
  std::size_t concurrency = 4;
  int max_new_tokens = 32;
  AttributeVerdicts fallback = {{Attribute::Relevance, false},
                                {Attribute::Informativeness, false},
                                {Attribute::Expression, false}};
  MarkerMode marker_mode = MarkerMode::Lenient;
};

struct LlmVerdict {
  std::string id;
  AttributeVerdicts verdicts;
  std::string raw_response;  // last response received, if any
  int attempts = 0;
  bool fallback = false;
  std::string error;  // why the fallback was used
};

/// One transcript line per call: id, attempt, prompt_hash, raw_response,
/// error, latency_ms. Lines are written grouped by instance in input order.
/// Results are aligned with `instances`.
std::vector<LlmVerdict> evaluate_remote(ChatTransport& transport, const std::vector<ReviewInstance>& instances,
                                        const LlmOptions& options = {}, std::ostream* transcript = nullptr);

}  // namespace crc
