#include <gtest/gtest.h>

#include <cstdlib>

#include "ir_agent/agents/backend.hpp"
#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

using namespace ir_agent;
using namespace ir_agent::agents;
using namespace std::chrono_literals;

namespace {

ChatRequest request(std::string agent, std::string user) {
  ChatRequest r;
  r.agent = std::move(agent);
  r.system = "sys";
  r.user = std::move(user);
  r.model = "m";
  return r;
}

struct FakeTransport {
  std::vector<HttpResult> script;
  std::size_t calls = 0;
  std::string last_body;
  std::map<std::string, std::string> last_headers;

  HttpTransport fn() {
    return [this](const std::string&, const std::map<std::string, std::string>& headers,
                  const std::string& body, std::chrono::milliseconds) {
      last_body = body;
      last_headers = headers;
      return script.at(std::min(calls++, script.size() - 1));
    };
  }
};

const std::string kOk =
    R"({"choices":[{"message":{"content":"hello"}}],"usage":{"prompt_tokens":12,"completion_tokens":3}})";

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (value) {
      setenv(name, value, 1);
    } else {
      unsetenv(name);
    }
  }
  ~ScopedEnv() { unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST(Digest, ShaOfSystemSeparatorUser) {
  EXPECT_EQ(prompt_digest("a", "b"), util::sha256_hex("a\n---\nb"));
  EXPECT_NE(prompt_digest("a", "b"), prompt_digest("b", "a"));
}

TEST(Mock, LookupOrderDigestAgentDefault) {
  const auto digest = prompt_digest("sys", "exact");
  auto mock = ScriptedMockBackend::from_json({
      {"responses", {{digest, {{"content", "by digest"}, {"usage", {{"input", 5}, {"output", 2}}}}}}},
      {"agents", {{"ti", {{"content", "ti default"}}}}},
      {"default", {{"content", "global"}}},
  });
  const auto r1 = mock.complete(request("ti", "exact"));
  EXPECT_EQ(r1.content, "by digest");
  EXPECT_EQ(r1.usage, (TokenUsage{5, 2}));
  EXPECT_EQ(mock.complete(request("ti", "other")).content, "ti default");
  const auto r3 = mock.complete(request("se", "other"));
  EXPECT_EQ(r3.content, "global");
  EXPECT_FALSE(r3.usage.has_value());
  ASSERT_EQ(mock.call_count(), 3u);
  EXPECT_EQ(mock.calls()[0].digest, digest);
  EXPECT_EQ(mock.calls()[2].agent, "se");
  mock.reset_calls();
  EXPECT_EQ(mock.call_count(), 0u);
}

TEST(Mock, StrictAndErrors) {
  auto mock = ScriptedMockBackend::from_json({{"default", {{"content", "x"}}}, {"strict", true}});
  EXPECT_THROW(mock.complete(request("ti", "u")), BackendError);
  ScriptedMockBackend failing;
  failing.set_default({"", std::nullopt, std::string("boom")});
  EXPECT_THROW(failing.complete(request("ti", "u")), BackendError);
  EXPECT_THROW(ScriptedMockBackend::from_json({{"unknown", 1}}), SchemaError);
  EXPECT_THROW(ScriptedMockBackend::from_json({{"default", {{"text", "x"}}}}), SchemaError);
  EXPECT_THROW(ScriptedMockBackend::load("/nonexistent/mock.json"), IoError);
}

TEST(Http, RequestBodyAndResponseParsing) {
  auto r = request("se", "u");
  r.max_tokens = 300;
  r.seed = 7;
  const auto body = HttpChatBackend::request_body(r);
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "u");
  EXPECT_EQ(body["max_tokens"], 300);
  EXPECT_EQ(body["seed"], 7);
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.8);
  EXPECT_FALSE(HttpChatBackend::request_body(request("se", "u")).contains("seed"));

  const auto parsed = HttpChatBackend::parse_response(kOk);
  EXPECT_EQ(parsed.content, "hello");
  EXPECT_EQ(parsed.usage, (TokenUsage{12, 3}));
  EXPECT_FALSE(HttpChatBackend::parse_response(R"({"choices":[{"message":{"content":"x"}}]})").usage);
  EXPECT_THROW(HttpChatBackend::parse_response("not json"), BackendError);
  EXPECT_THROW(HttpChatBackend::parse_response(R"({"choices":[]})"), BackendError);
}

TEST(Http, RetriesTransientFailuresWithBackoff) {
  const ScopedEnv env("IR_AGENT_TEST_KEY", "secret");
  FakeTransport t;
  t.script = {{0, "", "timeout"}, {429, "", ""}, {200, kOk, ""}};
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackendConfig cfg;
  cfg.api_key_env = "IR_AGENT_TEST_KEY";
  HttpChatBackend backend(cfg, t.fn(), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  EXPECT_EQ(backend.complete(request("ti", "u")).content, "hello");
  EXPECT_EQ(t.calls, 3u);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{1000ms, 2000ms}));
  EXPECT_EQ(t.last_headers.at("Authorization"), "Bearer secret");
}

TEST(Http, GivesUpAfterBudgetOrOnClientErrors) {
  const ScopedEnv env("IR_AGENT_TEST_KEY", "secret");
  HttpBackendConfig cfg;
  cfg.api_key_env = "IR_AGENT_TEST_KEY";
  auto no_sleep = [](std::chrono::milliseconds) {};

  FakeTransport server_error;
  server_error.script = {{503, "", ""}};
  HttpChatBackend a(cfg, server_error.fn(), no_sleep);
  try {
    a.complete(request("ti", "u"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(server_error.calls, 3u);

  FakeTransport client_error;
  client_error.script = {{401, "", ""}};
  HttpChatBackend b(cfg, client_error.fn(), no_sleep);
  EXPECT_THROW(b.complete(request("ti", "u")), BackendError);
  EXPECT_EQ(client_error.calls, 1u);
}

TEST(Http, MissingKeyFailsBeforeAnyRequest) {
  const ScopedEnv env("IR_AGENT_TEST_KEY", nullptr);
  FakeTransport t;
  t.script = {{200, kOk, ""}};
  HttpBackendConfig cfg;
  cfg.api_key_env = "IR_AGENT_TEST_KEY";
  HttpChatBackend backend(cfg, t.fn(), [](std::chrono::milliseconds) {});
  EXPECT_THROW(backend.complete(request("ti", "u")), BackendError);
  EXPECT_EQ(t.calls, 0u);
}

TEST(Http, MinimumIntervalSpacesRequests) {
  const ScopedEnv env("IR_AGENT_TEST_KEY", "k");
  FakeTransport t;
  t.script = {{200, kOk, ""}};
  HttpBackendConfig cfg;
  cfg.api_key_env = "IR_AGENT_TEST_KEY";
  cfg.min_interval = 10000ms;
  std::vector<std::chrono::milliseconds> sleeps;
  HttpChatBackend backend(cfg, t.fn(), [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  backend.complete(request("ti", "u"));
  backend.complete(request("ti", "u"));
  ASSERT_EQ(sleeps.size(), 1u);
  EXPECT_GT(sleeps[0].count(), 9000);
}
