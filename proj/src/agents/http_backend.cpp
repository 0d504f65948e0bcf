#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "ir_agent/agents/backend.hpp"
#include "ir_agent/error.hpp"

namespace ir_agent::agents {

HttpResult httplib_post(const std::string& url, const std::map<std::string, std::string>& headers,
                        const std::string& body, std::chrono::milliseconds timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, "", "malformed URL '" + url + "'"};
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  if (!res) return {0, "", httplib::to_string(res.error())};
  return {res->status, res->body, ""};
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config, HttpTransport transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  if (config_.max_attempts == 0) throw DomainError("retry budget must allow one attempt");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

nlohmann::json HttpChatBackend::request_body(const ChatRequest& request) {
  nlohmann::json body = {
      {"model", request.model},
      {"temperature", request.temperature},
      {"messages",
       {{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}}}};
  if (request.max_tokens > 0) body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

ChatResponse HttpChatBackend::parse_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(std::string("response is not JSON: ") + e.what());
  }
  ChatResponse out;
  try {
    out.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("response lacks choices[0].message.content");
  }
  if (j.contains("usage") && j.at("usage").is_object()) {
    const auto& u = j.at("usage");
    if (u.contains("prompt_tokens") && u.contains("completion_tokens")) {
      out.usage = TokenUsage{u.at("prompt_tokens").get<std::size_t>(),
                             u.at("completion_tokens").get<std::size_t>()};
    }
  }
  return out;
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw BackendError("environment variable " + config_.api_key_env + " is not set");
  }
  const std::map<std::string, std::string> headers = {
      {"Authorization", std::string("Bearer ") + key}};
  const std::string body = request_body(request).dump();

  auto backoff = config_.initial_backoff;
  HttpResult last;
  for (std::size_t attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (config_.min_interval.count() > 0) {
      std::unique_lock lock(rate_mutex_);
      const auto now = std::chrono::steady_clock::now();
      const auto ready = last_start_ + config_.min_interval;
      if (now < ready) sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(ready - now));
      last_start_ = std::chrono::steady_clock::now();
    }
    last = transport_(config_.endpoint, headers, body, config_.timeout);
    if (last.status >= 200 && last.status < 300) return parse_response(last.body);
    const bool retryable = last.status == 0 || last.status == 429 || last.status >= 500;
    if (!retryable) break;
    if (attempt < config_.max_attempts) {
      sleeper_(backoff);
      backoff *= 2;
    }
  }
  const std::string detail = last.status == 0 ? last.error : "HTTP " + std::to_string(last.status);
  throw BackendError("chat request failed: " + detail, last.status);
}

}  // namespace ir_agent::agents
