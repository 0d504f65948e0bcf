#include "ir_agent/agents/experts.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "ir_agent/error.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::agents {

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::string_view confidence_name(Confidence c) {
  switch (c) {
    case Confidence::kHigh: return "high";
    case Confidence::kMedium: return "medium";
    case Confidence::kLow: return "low";
  }
  return "low";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Leading list decoration: bullets, "1.", "(2)", "3)", "#", markdown emphasis.
std::string_view strip_decoration(std::string_view line, bool* numbered) {
  line = util::trim(line);
  bool changed = true;
  while (changed && !line.empty()) {
    changed = false;
    if (line.front() == '-' || line.front() == '*' || line.front() == '#' || line.front() == '>') {
      line.remove_prefix(1);
      line = util::trim(line);
      if (numbered) *numbered = true;
      changed = true;
      continue;
    }
    std::size_t i = line.front() == '(' ? 1 : 0;
    std::size_t digits = 0;
    while (i + digits < line.size() && std::isdigit(static_cast<unsigned char>(line[i + digits]))) {
      ++digits;
    }
    const std::size_t after = i + digits;
    if (digits > 0 && after < line.size() &&
        (line[after] == '.' || line[after] == ')' || line[after] == ':') &&
        (after + 1 == line.size() || line[after + 1] == ' ' || line[after + 1] == '\t' ||
         line[after + 1] == '*' || line[after + 1] == '`')) {
      line.remove_prefix(after + 1);
      line = util::trim(line);
      if (numbered) *numbered = true;
      changed = true;
    }
  }
  return line;
}

std::string clean_smiles_token(std::string_view line) {
  for (const std::string_view label : {"SMILES:", "smiles:", "SMILES :"}) {
    if (line.starts_with(label)) line = util::trim(line.substr(label.size()));
  }
  // Markdown emphasis and code spans around the string.
  while (!line.empty() && (line.front() == '*' || line.front() == '`' || line.front() == '_')) {
    line.remove_prefix(1);
  }
  const auto end = line.find_first_of(" \t");
  std::string token(line.substr(0, end));
  while (!token.empty() &&
         (token.back() == '*' || token.back() == '`' || token.back() == ',' ||
          token.back() == ';' || token.back() == '.')) {
    token.pop_back();
  }
  return token;
}

std::string dedupe_key(const std::string& s) {
  if (auto c = smiles::try_canonical(s)) return *c;
  return "\x01" + s;  // unparseable strings only collide with themselves
}

AgentCall invoke(LlmBackend& backend, AgentRole role, RenderedPrompt prompt,
                 std::size_t max_tokens, const AgentSettings& settings) {
  AgentCall call;
  call.role = role;
  call.digest = prompt.digest();
  call.prompt = std::move(prompt);
  ChatRequest request{std::string(role_key(role)), call.prompt.system, call.prompt.user,
                      settings.model, settings.temperature, max_tokens, settings.seed};
  try {
    ChatResponse response = backend.complete(request);
    call.response = std::move(response.content);
    if (response.usage) {
      call.usage = *response.usage;
    } else {
      call.usage = {estimate_tokens(call.prompt.system) + estimate_tokens(call.prompt.user),
                    estimate_tokens(call.response)};
      call.estimated = true;
    }
  } catch (const BackendError& e) {
    call.failed = true;
    call.error = e.what();
    call.usage = {estimate_tokens(call.prompt.system) + estimate_tokens(call.prompt.user), 0};
    call.estimated = true;
  }
  return call;
}

std::map<std::string, std::string> base_slots(const AgentInputs& inputs) {
  return {{"chemical_info", render_chemical_info(inputs.info)}};
}

}  // namespace

std::vector<SubstructureClaim> parse_claims(std::string_view text) {
  static const std::regex line_re(
      R"(^\s*(?:[-*]\s*)?(?:\d+[.)]\s*)?([^|]*?)\s*\|\s*\**(high|medium|low)\**\s*\|\s*(.*?)\s*$)",
      std::regex::icase);
  std::vector<SubstructureClaim> out;
  for (const auto& line : util::split_lines(text)) {
    std::smatch m;
    const std::string s(line);
    if (!std::regex_match(s, m, line_re)) continue;
    if (m[1].str().empty()) continue;
    const std::string level = lower(m[2].str());
    const Confidence c = level == "high" ? Confidence::kHigh
                         : level == "medium" ? Confidence::kMedium
                                             : Confidence::kLow;
    out.push_back({m[1].str(), c, m[3].str()});
  }
  return out;
}

std::vector<Motif> parse_motifs(std::string_view text) {
  static const std::regex line_re(R"(^\s*(?:[-*]\s*)?(?:\d+[.)]\s*)?([^|]*?)\s*\|\s*(.*?)\s*$)");
  std::vector<Motif> out;
  for (const auto& line : util::split_lines(text)) {
    std::smatch m;
    const std::string s(line);
    if (!std::regex_match(s, m, line_re)) continue;
    if (m[1].str().empty() || lower(m[1].str()) == "motif") continue;
    out.push_back({m[1].str(), m[2].str()});
  }
  return out;
}

SeParse parse_se_output(std::string_view text, std::span<const std::string> backfill,
                        std::size_t k) {
  SeParse out;
  std::set<std::string> seen;
  for (const auto& raw_line : util::split_lines(text)) {
    bool numbered = false;
    const std::string_view line = strip_decoration(raw_line, &numbered);
    if (line.empty()) continue;
    const bool single_token = line.find_first_of(" \t") == std::string_view::npos;
    if (!numbered && !single_token) continue;  // prose
    const std::string token = clean_smiles_token(line);
    if (token.empty()) continue;
    const auto canonical = smiles::try_canonical(token);
    if (!canonical) {
      ++out.dropped_unparseable;
      continue;
    }
    if (!seen.insert(*canonical).second) {
      ++out.dropped_duplicates;
      continue;
    }
    out.ranked.push_back(token);
  }
  if (out.ranked.size() > k) out.ranked.resize(k);
  for (const auto& s : backfill) {
    if (out.ranked.size() >= k) break;
    if (!seen.insert(dedupe_key(s)).second) continue;
    out.ranked.push_back(s);
    ++out.backfilled;
  }
  out.short_output = out.ranked.size() < k;
  return out;
}

ExpertAnalysis attempt_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                              const AgentInputs& inputs, const AgentSettings& settings) {
  auto slots = base_slots(inputs);
  ExpertAnalysis analysis;
  analysis.expert = tmpl.role;
  if (tmpl.role == AgentRole::kTableInterpretation) {
    if (inputs.candidates.empty()) throw DomainError("the TI expert needs candidates");
    slots["peak_interpretations"] = render_peak_interpretations(inputs.assignments);
    slots["candidates"] = render_candidates(inputs.candidates);
  } else if (tmpl.role == AgentRole::kRetrieval) {
    slots["retrieval_hits"] = render_retrieval_hits(inputs.hits);
  } else {
    throw DomainError("template is not an expert template");
  }
  analysis.call = invoke(backend, tmpl.role, tmpl.render(slots), settings.expert_max_tokens,
                         settings);
  if (analysis.call.failed) return analysis;
  analysis.text = analysis.call.response;
  if (tmpl.role == AgentRole::kTableInterpretation) {
    analysis.claims = parse_claims(analysis.text);
    if (analysis.claims.empty()) {
      analysis.warnings.push_back("no SUBSTRUCTURE | CONFIDENCE | RATIONALE lines found");
    }
  } else {
    analysis.motifs = parse_motifs(analysis.text);
    if (analysis.motifs.empty()) analysis.warnings.push_back("no MOTIF | SUPPORT lines found");
  }
  return analysis;
}

namespace {

ExpertAnalysis run_expert(LlmBackend& backend, const PromptTemplate& tmpl, AgentRole expected,
                          const AgentInputs& inputs, const AgentSettings& settings) {
  if (tmpl.role != expected) throw DomainError("template role does not match the expert");
  auto analysis = attempt_expert(backend, tmpl, inputs, settings);
  if (analysis.call.failed) throw BackendError(analysis.call.error);
  return analysis;
}

std::vector<std::string> backfill_pool(const AgentInputs& inputs) {
  std::vector<std::string> pool(inputs.candidates.begin(), inputs.candidates.end());
  for (const auto& hit : inputs.hits) pool.push_back(hit.smiles);
  return pool;
}

ElucidationResult finish(AgentCall call, const AgentInputs& inputs, std::size_t k) {
  ElucidationResult result;
  result.candidates.assign(inputs.candidates.begin(), inputs.candidates.end());
  const auto pool = backfill_pool(inputs);
  if (call.failed) {
    result.fallback = true;
    result.warnings.push_back("final agent failed: " + call.error);
  } else {
    result.raw_text = call.response;
  }
  const SeParse parsed = parse_se_output(result.raw_text, pool, k);
  result.ranked = parsed.ranked;
  result.dropped_unparseable = parsed.dropped_unparseable;
  result.dropped_duplicates = parsed.dropped_duplicates;
  result.backfilled = parsed.backfilled;
  result.short_output = parsed.short_output;
  result.calls.push_back(std::move(call));
  return result;
}

}  // namespace

ExpertAnalysis run_ti_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                             const AgentInputs& inputs, const AgentSettings& settings) {
  return run_expert(backend, tmpl, AgentRole::kTableInterpretation, inputs, settings);
}

ExpertAnalysis run_ret_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                              const AgentInputs& inputs, const AgentSettings& settings) {
  return run_expert(backend, tmpl, AgentRole::kRetrieval, inputs, settings);
}

ElucidationResult run_se_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                                const AgentInputs& inputs, const ExpertAnalysis* ti,
                                const ExpertAnalysis* ret, std::size_t k,
                                const AgentSettings& settings) {
  if (k < 1) throw DomainError("k must be at least 1");
  if (inputs.candidates.empty()) throw DomainError("the SE expert needs candidates");
  auto slots = base_slots(inputs);
  slots["candidates"] = render_candidates(inputs.candidates);
  slots["ti_analysis"] = ti != nullptr ? ti->text : "Not available.";
  slots["ret_analysis"] = ret != nullptr ? ret->text : "Not available.";
  slots["k"] = std::to_string(k);
  auto call = invoke(backend, tmpl.role, tmpl.render(slots), settings.final_max_tokens, settings);
  auto result = finish(std::move(call), inputs, k);
  if (ti != nullptr) {
    result.ti = *ti;
    result.calls.insert(result.calls.begin(), ti->call);
  }
  if (ret != nullptr) {
    result.ret = *ret;
    result.calls.insert(result.calls.begin() + (ti != nullptr ? 1 : 0), ret->call);
  }
  return result;
}

ElucidationResult run_single_agent(LlmBackend& backend, const PromptTemplate& tmpl,
                                   const AgentInputs& inputs, std::size_t k,
                                   const AgentSettings& settings) {
  if (k < 1) throw DomainError("k must be at least 1");
  auto slots = base_slots(inputs);
  slots["peak_interpretations"] = render_peak_interpretations(inputs.assignments);
  slots["retrieval_hits"] = render_retrieval_hits(inputs.hits);
  slots["candidates"] = render_candidates(inputs.candidates);
  slots["k"] = std::to_string(k);
  auto call = invoke(backend, tmpl.role, tmpl.render(slots), settings.final_max_tokens, settings);
  return finish(std::move(call), inputs, k);
}

void CostLedger::record(const AgentCall& call) {
  auto& c = per_agent_[std::string(role_key(call.role))];
  c.input_tokens += call.usage.input;
  c.output_tokens += call.usage.output;
  c.calls += 1;
  c.estimated = c.estimated || call.estimated;
}

void CostLedger::merge(const CostLedger& other) {
  for (const auto& [agent, cost] : other.per_agent_) add(agent, cost);
}

void CostLedger::add(const std::string& agent, const AgentCost& cost) {
  auto& c = per_agent_[agent];
  c.input_tokens += cost.input_tokens;
  c.output_tokens += cost.output_tokens;
  c.calls += cost.calls;
  c.estimated = c.estimated || cost.estimated;
}

AgentCost CostLedger::total() const {
  AgentCost t;
  for (const auto& [agent, c] : per_agent_) {
    t.input_tokens += c.input_tokens;
    t.output_tokens += c.output_tokens;
    t.calls += c.calls;
    t.estimated = t.estimated || c.estimated;
  }
  return t;
}

nlohmann::json CostLedger::to_json() const {
  auto cost_json = [](const AgentCost& c) {
    return nlohmann::json{{"input_tokens", c.input_tokens},
                          {"output_tokens", c.output_tokens},
                          {"calls", c.calls},
                          {"estimated", c.estimated}};
  };
  nlohmann::json agents = nlohmann::json::object();
  for (const auto& [agent, c] : per_agent_) agents[agent] = cost_json(c);
  return {{"agents", agents}, {"total", cost_json(total())}};
}

CostLedger cost_ledger(const ElucidationResult& result) {
  CostLedger ledger;
  for (const auto& call : result.calls) ledger.record(call);
  return ledger;
}

namespace {

nlohmann::json call_to_json(const AgentCall& c) {
  return {{"agent", std::string(role_key(c.role))},
          {"digest", c.digest},
          {"system", c.prompt.system},
          {"user", c.prompt.user},
          {"response", c.response},
          {"usage", {{"input", c.usage.input}, {"output", c.usage.output}}},
          {"estimated", c.estimated},
          {"failed", c.failed},
          {"error", c.error}};
}

}  // namespace

nlohmann::json analysis_to_json(const ExpertAnalysis& a) {
  nlohmann::json j = {{"expert", std::string(role_key(a.expert))},
                      {"text", a.text},
                      {"warnings", a.warnings}};
  if (a.expert == AgentRole::kTableInterpretation) {
    auto claims = nlohmann::json::array();
    for (const auto& c : a.claims) {
      claims.push_back({{"substructure", c.substructure},
                        {"confidence", std::string(confidence_name(c.confidence))},
                        {"rationale", c.rationale}});
    }
    j["claims"] = claims;
  } else {
    auto motifs = nlohmann::json::array();
    for (const auto& m : a.motifs) motifs.push_back({{"motif", m.motif}, {"support", m.support}});
    j["motifs"] = motifs;
  }
  return j;
}

nlohmann::json result_to_json(const ElucidationResult& r) {
  auto calls = nlohmann::json::array();
  for (const auto& c : r.calls) calls.push_back(call_to_json(c));
  return {{"id", r.spectrum_id},
          {"ranked", r.ranked},
          {"candidates", r.candidates},
          {"raw_text", r.raw_text},
          {"ti_analysis", r.ti ? analysis_to_json(*r.ti) : nlohmann::json()},
          {"ret_analysis", r.ret ? analysis_to_json(*r.ret) : nlohmann::json()},
          {"fallback", r.fallback},
          {"short_output", r.short_output},
          {"dropped_unparseable", r.dropped_unparseable},
          {"dropped_duplicates", r.dropped_duplicates},
          {"backfilled", r.backfilled},
          {"warnings", r.warnings},
          {"cost", cost_ledger(r).to_json()},
          {"calls", calls}};
}

}  // namespace ir_agent::agents
