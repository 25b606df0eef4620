#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nesy/llm/prompts.hpp"

namespace nesy::llm {

struct Message {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> max_tokens;
  /// Not sent on the wire; lets the offline stub answer without re-reading
  /// the rendered prompt.
  std::optional<TemplateName> template_name;
  Bindings bindings;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool estimated = false;
};

struct ChatReply {
  std::string text;
  std::optional<Usage> usage;
};

class EndpointError : public std::runtime_error {
 public:
  enum class Kind { transport, http_status, bad_response, config };
  EndpointError(Kind kind, const std::string& what, int status = 0)
      : std::runtime_error(what), kind_(kind), status_(status) {}
  Kind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }
  /// Transport failures, 429 and 5xx are worth another try.
  bool retryable() const noexcept {
    return kind_ == Kind::transport || (kind_ == Kind::http_status && (status_ == 429 || status_ >= 500));
  }

 private:
  Kind kind_;
  int status_;
};

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  /// One request, no retries. Throws EndpointError.
  virtual ChatReply complete(const ChatRequest& request) = 0;
  virtual std::string describe() const = 0;
};

struct EndpointConfig {
  std::string base_url;  ///< e.g. https://api.example.com/v1; "/chat/completions" is appended
  std::string model;
  std::string api_key_env;  ///< name of the environment variable holding the key
  std::chrono::milliseconds timeout{120000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};  ///< doubled after every failed try
  std::optional<std::int64_t> seed = 0;
  std::optional<std::int64_t> max_tokens;
  double temperature = 0;
};

/// OpenAI-style chat completions over HTTP(S).
class HttpEndpoint : public Endpoint {
 public:
  explicit HttpEndpoint(EndpointConfig config);
  ChatReply complete(const ChatRequest& request) override;
  std::string describe() const override;

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

nlohmann::json request_body(const ChatRequest& request);
/// Text of choices[0].message.content and the usage block if present.
ChatReply parse_reply(const nlohmann::json& body);

/// Whitespace-delimited words x 4/3, rounded up.
std::int64_t estimate_tokens(std::string_view text);

struct ChatExchange {
  ChatRequest request;
  std::string response;  ///< verbatim
  Usage usage;
  std::chrono::microseconds latency{0};
  int tries = 0;
  bool blank = false;
  std::optional<std::string> error;  ///< set when every try failed
};

nlohmann::json to_json(const ChatExchange& e);

/// Renders the template (throwing TemplateError before any request), sends
/// it as one user message and retries retryable failures with exponential
/// backoff. Never throws EndpointError: failures are recorded in `error`.
ChatExchange chat(Endpoint& endpoint, const EndpointConfig& config, TemplateName name, const Bindings& bindings);

/// "stub:<mode>" builds a StubEndpoint, anything else an HttpEndpoint on
/// config.base_url.
std::unique_ptr<Endpoint> make_endpoint(const std::string& spec, const EndpointConfig& config);

}  // namespace nesy::llm
