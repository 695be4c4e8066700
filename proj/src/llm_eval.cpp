#include "crc/llm_eval.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "crc/criteria.hpp"
#include "crc/rng.hpp"

namespace crc {
namespace {

std::string_view attribute_meaning(Attribute a) {
  switch (a) {
    case Attribute::Relevance:
      return "whether the comment is about the code change it is attached to";
    case Attribute::Informativeness:
      return "whether the comment gives the author enough to act on";
    case Attribute::Expression:
      return "whether the comment is written clearly and respectfully";
  }
  return {};
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string PromptBundle::text() const {
  return instruction + "\n\n" + attributes + "\n\n" + criteria + "\n\n" + rule + "\n\n" + output_template +
         "\n\n" + data;
}

std::string PromptBundle::hash() const { return hex16(fnv1a64(text())); }

PromptBundle build_prompt(const ReviewInstance&, const NormalizedInput& input) {
  PromptBundle p;
  p.instruction =
      "You will judge the clarity of a code review comment (CRC) written on a code change. "
      "Evaluate it on each attribute below using the listed criteria.";

  p.attributes = "Attributes:";
  for (auto a : kAttributes) {
    p.attributes += "\n- " + std::string(to_string(a)) + ": " + std::string(attribute_meaning(a)) + ".";
  }

  p.criteria = "Evaluation criteria:";
  for (auto a : kAttributes) {
    p.criteria += "\n" + std::string(to_string(a)) + ":";
    for (auto id : criteria_of(a)) {
      const auto& c = criterion(id);
      p.criteria += "\n- " + std::string(to_string(id)) + (c.kind == CriterionKind::Essential ? " (essential) " : " (optional) ") +
                    std::string(c.title) + " " + std::string(c.description);
    }
  }

  p.rule =
      "Answer Yes for an attribute only if the comment's results on that attribute's criteria "
      "meet all of the essential ones and at least one of the optional ones. Otherwise answer No.";

  p.output_template = "Reply with exactly these three lines and nothing else:";
  for (auto a : kAttributes) p.output_template += "\n" + std::string(to_string(a)) + ": Yes/No";

  // The normalized diff is a single line, so the comment boundary is unambiguous.
  p.data = "Code change:\n" + input.normalized_diff + "\n\nReview comment:\n" + input.comment;
  return p;
}

std::string render_verdicts(const AttributeVerdicts& verdicts) {
  std::string out;
  for (auto a : kAttributes) {
    if (!out.empty()) out += '\n';
    out += std::string(to_string(a)) + ": " + (verdicts.at(a) ? "Yes" : "No");
  }
  return out;
}

ParseResult parse_response(std::string_view text) {
  static const std::regex verdict(
      R"(\b(relevance|informativeness|expression)\b\s*(?:\*\*)?\s*[:=\-]?\s*(?:\*\*)?\s*(yes|no|true|false)\b(\s*/)?)",
      std::regex::icase);
  const std::string raw(text);
  std::map<Attribute, std::optional<bool>> found;
  for (std::sregex_iterator it(raw.begin(), raw.end(), verdict), end; it != end; ++it) {
    const auto& m = *it;
    if (m[3].matched) continue;  // "Yes/No" template echo
    const auto attr = parse_attribute(m[1].str());
    auto word = m[2].str();
    for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool value = word == "yes" || word == "true";
    auto& slot = found[attr];
    if (slot && *slot != value) {
      return InvalidOutput{raw, "conflicting verdicts for " + std::string(to_string(attr))};
    }
    slot = value;
  }
  AttributeVerdicts out;
  for (auto a : kAttributes) {
    const auto it = found.find(a);
    if (it == found.end()) return InvalidOutput{raw, "no verdict for " + std::string(to_string(a))};
    out[a] = *it->second;
  }
  return out;
}

EndpointConfig EndpointConfig::from_env() {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  EndpointConfig c;
  c.url = env("CRC_LLM_ENDPOINT");
  if (c.url.empty()) throw ArgumentError("CRC_LLM_ENDPOINT is not set");
  c.api_key = env("CRC_LLM_API_KEY");
  c.model = env("CRC_LLM_MODEL");
  return c;
}

nlohmann::json chat_request_body(const EndpointConfig& config, const std::string& prompt, int max_tokens) {
  nlohmann::json body = {{"messages", {{{"role", "user"}, {"content", prompt}}}},
                         {"max_tokens", max_tokens},
                         {"temperature", config.temperature}};
  if (!config.model.empty()) body["model"] = config.model;
  return body;
}

std::string chat_response_text(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected chat response: ") + e.what());
  }
}

HttpChatTransport::HttpChatTransport(EndpointConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(config_.url, m, url)) throw ArgumentError("invalid endpoint URL " + config_.url);
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin_.rfind("https", 0) == 0 || origin_.rfind("HTTPS", 0) == 0) {
    throw ArgumentError("this build has no TLS support; use an http:// endpoint");
  }
#endif
}

std::string HttpChatTransport::complete(const std::string& prompt, int max_tokens) {
  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const auto body = chat_request_body(config_, prompt, max_tokens).dump();
  const auto res = client.Post(path_, headers, body, "application/json");
  if (!res) throw BackendError("request to " + config_.url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw BackendError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  return chat_response_text(res->body);
}

std::vector<LlmVerdict> evaluate_remote(ChatTransport& transport, const std::vector<ReviewInstance>& instances,
                                        const LlmOptions& options, std::ostream* transcript) {
  std::vector<LlmVerdict> results(instances.size());
  std::vector<std::vector<nlohmann::json>> logs(instances.size());

  auto run_one = [&](std::size_t i) {
    const auto& inst = instances[i];
    auto& r = results[i];
    r.id = inst.id;
    std::string prompt, prompt_hash;
    try {
      const auto bundle = build_prompt(inst, preprocess(inst, options.marker_mode));
      prompt = bundle.text();
      prompt_hash = bundle.hash();
    } catch (const Error& e) {
      r.verdicts = options.fallback;
      r.fallback = true;
      r.error = e.what();
      return;
    }
    for (int attempt = 1; attempt <= 1 + std::max(0, options.retries); ++attempt) {
      r.attempts = attempt;
      const auto start = std::chrono::steady_clock::now();
      nlohmann::json line = {{"id", inst.id}, {"attempt", attempt}, {"prompt_hash", prompt_hash}};
      try {
        r.raw_response = transport.complete(prompt, options.max_new_tokens);
        line["raw_response"] = r.raw_response;
        auto parsed = parse_response(r.raw_response);
        if (auto* v = std::get_if<AttributeVerdicts>(&parsed)) {
          r.verdicts = *v;
          r.error.clear();
        } else {
          r.error = "invalid output: " + std::get<InvalidOutput>(parsed).reason;
        }
      } catch (const std::exception& e) {
        r.error = e.what();
        line["raw_response"] = nullptr;
      }
      line["error"] = r.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.error);
      line["latency_ms"] =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      logs[i].push_back(std::move(line));
      if (r.error.empty()) return;
    }
    r.verdicts = options.fallback;
    r.fallback = true;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < instances.size(); i = next++) run_one(i);
  };
  const auto threads = std::clamp<std::size_t>(options.concurrency, 1, std::max<std::size_t>(instances.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (transcript) {
    for (const auto& per : logs) {
      for (const auto& line : per) *transcript << line.dump() << '\n';
    }
  }
  return results;
}

}  // namespace crc
