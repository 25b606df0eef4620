#include "nesy/llm/endpoint.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "nesy/llm/stub.hpp"

namespace nesy::llm {

using nlohmann::json;

HttpEndpoint::HttpEndpoint(EndpointConfig config) : config_(std::move(config)) {
  const auto scheme = config_.base_url.find("://");
  if (scheme == std::string::npos) {
    throw EndpointError(EndpointError::Kind::config,
                        fmt::format("endpoint URL '{}' needs an http:// or https:// scheme", config_.base_url));
  }
  const auto path = config_.base_url.find('/', scheme + 3);
  scheme_host_port_ = config_.base_url.substr(0, path);
  path_prefix_ = path == std::string::npos ? "" : config_.base_url.substr(path);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpEndpoint::describe() const { return fmt::format("{} ({})", config_.base_url, config_.model); }

json request_body(const ChatRequest& r) {
  json messages = json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json body{{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}};
  if (r.seed) body["seed"] = *r.seed;
  if (r.max_tokens) body["max_tokens"] = *r.max_tokens;
  return body;
}

ChatReply parse_reply(const json& body) {
  ChatReply out;
  try {
    const auto& message = body.at("choices").at(0).at("message");
    const auto& content = message.at("content");
    out.text = content.is_null() ? "" : content.get<std::string>();
  } catch (const json::exception& e) {
    throw EndpointError(EndpointError::Kind::bad_response, fmt::format("reply has no message content: {}", e.what()));
  }
  if (auto it = body.find("usage"); it != body.end() && it->is_object() && it->contains("prompt_tokens") &&
                                    it->contains("completion_tokens")) {
    Usage u;
    u.prompt_tokens = it->at("prompt_tokens").get<std::int64_t>();
    u.completion_tokens = it->at("completion_tokens").get<std::int64_t>();
    out.usage = u;
  }
  return out;
}

ChatReply HttpEndpoint::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = config_.timeout.count() / 1000;
  const auto usecs = (config_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw EndpointError(EndpointError::Kind::config,
                          fmt::format("environment variable {} is not set", config_.api_key_env));
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request).dump(), "application/json");
  if (!res) {
    throw EndpointError(EndpointError::Kind::transport,
                        fmt::format("request to {} failed: {}", scheme_host_port_, httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw EndpointError(EndpointError::Kind::http_status,
                        fmt::format("endpoint answered HTTP {}: {}", res->status, res->body.substr(0, 500)),
                        res->status);
  }
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw EndpointError(EndpointError::Kind::bad_response, fmt::format("reply is not JSON: {}", e.what()));
  }
  return parse_reply(body);
}

std::int64_t estimate_tokens(std::string_view text) {
  std::int64_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return (words * 4 + 2) / 3;
}

json to_json(const ChatExchange& e) {
  json j{{"model", e.request.model},
         {"template", e.request.template_name ? json(to_string(*e.request.template_name)) : json(nullptr)},
         {"prompt", e.request.messages.empty() ? std::string() : e.request.messages.back().content},
         {"response", e.response},
         {"usage",
          {{"prompt_tokens", e.usage.prompt_tokens},
           {"completion_tokens", e.usage.completion_tokens},
           {"estimated", e.usage.estimated}}},
         {"latency_us", e.latency.count()},
         {"tries", e.tries},
         {"blank", e.blank}};
  j["error"] = e.error ? json(*e.error) : json(nullptr);
  return j;
}

ChatExchange chat(Endpoint& endpoint, const EndpointConfig& config, TemplateName name, const Bindings& bindings) {
  ChatExchange ex;
  ex.request.model = config.model;
  ex.request.temperature = config.temperature;
  ex.request.seed = config.seed;
  ex.request.max_tokens = config.max_tokens;
  ex.request.template_name = name;
  ex.request.bindings = bindings;
  ex.request.messages.push_back({"user", render(prompt_template(name), bindings)});

  auto backoff = config.backoff;
  for (int attempt = 0;; ++attempt) {
    ++ex.tries;
    const auto started = std::chrono::steady_clock::now();
    try {
      ChatReply reply = endpoint.complete(ex.request);
      ex.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
      ex.response = std::move(reply.text);
      if (reply.usage) {
        ex.usage = *reply.usage;
      } else {
        ex.usage.prompt_tokens = estimate_tokens(ex.request.messages.back().content);
        ex.usage.completion_tokens = estimate_tokens(ex.response);
        ex.usage.estimated = true;
      }
      ex.blank = ex.response.find_first_not_of(" \t\r\n") == std::string::npos;
      return ex;
    } catch (const EndpointError& e) {
      if (!e.retryable() || attempt >= config.max_retries) {
        ex.error = e.what();
        return ex;
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::unique_ptr<Endpoint> make_endpoint(const std::string& spec, const EndpointConfig& config) {
  if (spec.rfind("stub:", 0) == 0) return std::make_unique<StubEndpoint>(StubEndpoint::from_spec(spec.substr(5)));
  if (spec == "stub") return std::make_unique<StubEndpoint>(StubEndpoint::Mode::faithful);
  auto c = config;
  if (!spec.empty() && spec != "http") c.base_url = spec;
  return std::make_unique<HttpEndpoint>(c);
}

}  // namespace nesy::llm
