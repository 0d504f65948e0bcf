#include "ir_agent/agents/backend.hpp"

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::agents {

std::string prompt_digest(std::string_view system, std::string_view user) {
  std::string joined;
  joined.reserve(system.size() + user.size() + 5);
  joined.append(system).append("\n---\n").append(user);
  return util::sha256_hex(joined);
}

namespace {

ScriptedMockBackend::Entry parse_entry(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError("mock entry " + where + " must be an object");
  ScriptedMockBackend::Entry entry;
  if (j.contains("error")) {
    entry.error = j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump();
    return entry;
  }
  if (!j.contains("content") || !j.at("content").is_string()) {
    throw SchemaError("mock entry " + where + " needs a string 'content' or an 'error'");
  }
  entry.content = j.at("content").get<std::string>();
  if (j.contains("usage") && !j.at("usage").is_null()) {
    const auto& u = j.at("usage");
    try {
      entry.usage = TokenUsage{u.at("input").get<std::size_t>(), u.at("output").get<std::size_t>()};
    } catch (const nlohmann::json::exception&) {
      throw SchemaError("mock entry " + where + " has malformed usage");
    }
  }
  return entry;
}

}  // namespace

ScriptedMockBackend ScriptedMockBackend::from_json(const nlohmann::json& script) {
  if (!script.is_object()) throw SchemaError("mock script must be a JSON object");
  for (const auto& [key, value] : script.items()) {
    if (key != "responses" && key != "agents" && key != "default" && key != "strict") {
      throw SchemaError("unknown mock script key '" + key + "'");
    }
  }
  ScriptedMockBackend mock;
  if (script.contains("responses")) {
    for (const auto& [digest, entry] : script.at("responses").items()) {
      mock.responses_[digest] = parse_entry(entry, "'" + digest + "'");
    }
  }
  if (script.contains("agents")) {
    for (const auto& [agent, entry] : script.at("agents").items()) {
      mock.agent_defaults_[agent] = parse_entry(entry, "for agent '" + agent + "'");
    }
  }
  if (script.contains("default") && !script.at("default").is_null()) {
    mock.default_ = parse_entry(script.at("default"), "default");
  }
  if (script.contains("strict")) mock.strict_ = script.at("strict").get<bool>();
  return mock;
}

ScriptedMockBackend ScriptedMockBackend::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(util::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void ScriptedMockBackend::set_response(const std::string& digest, Entry entry) {
  responses_[digest] = std::move(entry);
}

void ScriptedMockBackend::set_agent_default(const std::string& agent, Entry entry) {
  agent_defaults_[agent] = std::move(entry);
}

void ScriptedMockBackend::set_default(Entry entry) { default_ = std::move(entry); }

ChatResponse ScriptedMockBackend::complete(const ChatRequest& request) {
  const std::string digest = prompt_digest(request.system, request.user);
  {
    const std::lock_guard lock(*mutex_);
    calls_.push_back({request.agent, digest});
  }
  const Entry* entry = nullptr;
  if (const auto it = responses_.find(digest); it != responses_.end()) {
    entry = &it->second;
  } else if (!strict_) {
    if (const auto a = agent_defaults_.find(request.agent); a != agent_defaults_.end()) {
      entry = &a->second;
    } else if (default_) {
      entry = &*default_;
    }
  }
  if (entry == nullptr) {
    throw BackendError("mock has no response for " + request.agent + " prompt " + digest);
  }
  if (entry->error) throw BackendError("mock failure: " + *entry->error);
  return {entry->content, entry->usage};
}

std::vector<ScriptedMockBackend::Call> ScriptedMockBackend::calls() const {
  const std::lock_guard lock(*mutex_);
  return calls_;
}

std::size_t ScriptedMockBackend::call_count() const {
  const std::lock_guard lock(*mutex_);
  return calls_.size();
}

void ScriptedMockBackend::reset_calls() {
  const std::lock_guard lock(*mutex_);
  calls_.clear();
}

}  // namespace ir_agent::agents
