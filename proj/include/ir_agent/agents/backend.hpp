#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ir_agent::agents {

struct ChatRequest {
  /// Which agent is asking ("ti", "ret", "se", "single"); used for mock defaults and ledgers.
  std::string agent;
  std::string system;
  std::string user;
  std::string model;
  double temperature = 0.8;
  /// Output budget; 0 leaves it to the backend.
  std::size_t max_tokens = 0;
  /// Sampling seed forwarded to backends that accept one.
  std::optional<std::uint64_t> seed;
};

struct TokenUsage {
  std::size_t input = 0;
  std::size_t output = 0;

  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct ChatResponse {
  std::string content;
  /// Absent when the backend did not report usage.
  std::optional<TokenUsage> usage;
};

/// Digest that keys scripted responses: sha256 of system, a separator line and user.
std::string prompt_digest(std::string_view system, std::string_view user);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string name() const = 0;
  /// Throws BackendError once the backend's own retry budget is spent.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Deterministic backend answering from a JSON script:
///   {"responses": {"<digest>": {"content": s, "usage": {"input": n, "output": n}} | {"error": s}},
///    "agents": {"ti": {...}, ...}, "default": {...}, "strict": bool}
/// Lookup order: digest, agent default, global default. With strict set, an
/// unmatched digest is an error even when defaults exist.
class ScriptedMockBackend : public LlmBackend {
 public:
  struct Entry {
    std::string content;
    std::optional<TokenUsage> usage;
    /// When set, the call fails with this message.
    std::optional<std::string> error;
  };

  struct Call {
    std::string agent;
    std::string digest;
  };

  ScriptedMockBackend() = default;
  static ScriptedMockBackend from_json(const nlohmann::json& script);
  static ScriptedMockBackend load(const std::filesystem::path& path);

  void set_response(const std::string& digest, Entry entry);
  void set_agent_default(const std::string& agent, Entry entry);
  void set_default(Entry entry);
  void set_strict(bool strict) { strict_ = strict; }

  std::string name() const override { return "mock"; }
  ChatResponse complete(const ChatRequest& request) override;

  /// Calls in arrival order. Concurrent callers may interleave.
  std::vector<Call> calls() const;
  std::size_t call_count() const;
  void reset_calls();

 private:
  std::map<std::string, Entry> responses_;
  std::map<std::string, Entry> agent_defaults_;
  std::optional<Entry> default_;
  bool strict_ = false;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  std::vector<Call> calls_;
};

struct HttpResult {
  int status = 0;  // 0 = transport failure or timeout
  std::string body;
  std::string error;
};

/// Sends one POST; injectable so retry behavior can be tested offline.
using HttpTransport = std::function<HttpResult(
    const std::string& url, const std::map<std::string, std::string>& headers,
    const std::string& body, std::chrono::milliseconds timeout)>;

/// cpp-httplib transport (TLS for https URLs).
HttpResult httplib_post(const std::string& url, const std::map<std::string, std::string>& headers,
                        const std::string& body, std::chrono::milliseconds timeout);

struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "IR_AGENT_API_KEY";
  std::chrono::milliseconds timeout{60000};
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  /// Minimum spacing between request starts; 0 disables the cap.
  std::chrono::milliseconds min_interval{0};
};

/// OpenAI-compatible chat-completions client. Retries transport errors, 429
/// and 5xx with exponential backoff; other statuses fail immediately.
class HttpChatBackend : public LlmBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatBackend(HttpBackendConfig config, HttpTransport transport = httplib_post,
                           Sleeper sleeper = {});

  std::string name() const override { return "http"; }
  ChatResponse complete(const ChatRequest& request) override;

  static nlohmann::json request_body(const ChatRequest& request);
  static ChatResponse parse_response(const std::string& body);

 private:
  HttpBackendConfig config_;
  HttpTransport transport_;
  Sleeper sleeper_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point last_start_{};
};

}  // namespace ir_agent::agents
