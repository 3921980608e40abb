#pragma once

#include "verafi/chunking.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace verafi {

enum class PromptKind { RagOnly, BaselineAgent, NeurosymbolicAgent };

struct PromptDoc {
    DocumentChunk chunk;
    int rank = 0;  // rerank position, 1-based
};

// Formats retrieved chunks with provenance headers in rerank order. The
// "(doc_id, page N)" pattern in the header is what citation parsing keys on.
std::string format_documents(const std::vector<PromptDoc>& docs);

// Renders the full prompt for the given kind. policy_context is required
// for NeurosymbolicAgent (the output of format_policy_context) and must be
// absent otherwise.
std::string assemble_prompt(PromptKind kind, const std::string& question,
                            const std::vector<PromptDoc>& docs,
                            const std::optional<std::string>& policy_context);

struct ToolCall {
    std::string call_id;
    std::string name;
    nlohmann::json arguments;
};

struct ModelTurn {
    std::string text;
    std::vector<ToolCall> tool_calls;
};

struct ToolOutput {
    std::string call_id;
    bool success = false;
    std::string payload;
};

struct ChatMessage {
    std::string role;  // system | user | assistant | tool
    std::string content;
};

struct ToolSpec {
    std::string name;
    std::string description;
    nlohmann::json parameter_schema;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual ModelTurn chat(const std::vector<ChatMessage>& messages,
                           const std::vector<ToolSpec>& tool_specs) = 0;
};

// Replays a fixed list of canned turns, one per chat() call. Throws when the
// script is exhausted.
class ScriptedLlmClient : public LlmClient {
public:
    explicit ScriptedLlmClient(std::vector<ModelTurn> turns) : turns_(std::move(turns)) {}
    static ScriptedLlmClient from_json_file(const std::string& path);
    ModelTurn chat(const std::vector<ChatMessage>& messages,
                   const std::vector<ToolSpec>& tool_specs) override;

private:
    std::vector<ModelTurn> turns_;
    size_t next_ = 0;
};

// Deterministic offline model: answers immediately (no tool calls) by
// echoing the first retrieved document from the prompt with its citation.
class MockLlmClient : public LlmClient {
public:
    ModelTurn chat(const std::vector<ChatMessage>& messages,
                   const std::vector<ToolSpec>& tool_specs) override;
};

// HTTP chat client speaking the JSON wire contract:
//   POST /chat {"messages": [{"role","content"}...], "tools": [...],
//               "temperature": t, "max_tokens": n}
//   -> {"text": ..., "tool_calls": [{"id","name","arguments"}...]}
class HttpLlmClient : public LlmClient {
public:
    HttpLlmClient(std::string host, int port, double temperature = 0.0, int max_tokens = 4096)
        : host_(std::move(host)), port_(port), temperature_(temperature),
          max_tokens_(max_tokens) {}
    ModelTurn chat(const std::vector<ChatMessage>& messages,
                   const std::vector<ToolSpec>& tool_specs) override;

private:
    std::string host_;
    int port_;
    double temperature_;
    int max_tokens_;
};

struct SearchResult {
    std::string title;
    std::string url;
    std::string snippet;
};

class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::vector<SearchResult> search(const std::string& query, size_t max_results) = 0;
};

// Serves recorded results keyed by normalized query (lowercased, whitespace
// collapsed). Unknown queries return an empty list.
class FixtureSearchClient : public SearchClient {
public:
    explicit FixtureSearchClient(const std::string& fixture_path);
    std::vector<SearchResult> search(const std::string& query, size_t max_results) override;

private:
    std::map<std::string, std::vector<SearchResult>> fixtures_;
};

using ToolFn = std::function<std::string(const nlohmann::json& arguments)>;

class ToolRegistry {
public:
    void register_tool(ToolSpec spec, ToolFn fn);
    const std::vector<ToolSpec>& specs() const { return specs_; }
    bool has(const std::string& name) const { return tools_.count(name) > 0; }
    // Returns success=false with a diagnostic payload for unknown tools or
    // tool exceptions; the agent loop keeps running either way.
    ToolOutput invoke(const ToolCall& call) const;

private:
    std::vector<ToolSpec> specs_;
    std::map<std::string, ToolFn> tools_;
};

// The standard registry: calculator, code_eval, web_search.
ToolRegistry make_default_tools(std::shared_ptr<SearchClient> search, size_t search_max_results = 5);

struct TranscriptEvent {
    enum Kind { Model, Tool } kind = Model;
    ModelTurn model_turn;   // when kind == Model
    ToolOutput tool_output;  // when kind == Tool
};

struct AgentTranscript {
    std::vector<TranscriptEvent> events;
    int iterations = 0;
    bool truncated = false;  // hit max_iterations while still requesting tools

    const ModelTurn& final_turn() const;
    nlohmann::json to_json() const;
};

// Tool loop: send the conversation, execute requested tools, append their
// outputs, repeat until the model stops calling tools or the iteration
// bound is hit.
AgentTranscript run_agent(const std::string& prompt, const ToolRegistry& tools, LlmClient& llm,
                          int max_iterations = 10);

struct AgentAnswer {
    std::string text;
    std::vector<std::pair<std::string, int>> cited_sources;  // (doc_id, page)
};

// Best-effort citation extraction over "(doc_id, page N)" patterns.
std::vector<std::pair<std::string, int>> parse_citations(const std::string& text);

// Answer-extraction fallback chain: message attribute, then the first of
// message/content/text/answer in a mapping, then stringification.
std::string extract_answer(const nlohmann::json& response);

}  // namespace verafi
