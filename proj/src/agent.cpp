#include "verafi/agent.hpp"

#include "verafi/calc.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

std::string format_documents(const std::vector<PromptDoc>& docs) {
    std::string out;
    for (size_t i = 0; i < docs.size(); ++i) {
        if (i > 0) out += "\n\n";
        const auto& d = docs[i];
        out += "Document " + std::to_string(d.rank) + " (" + d.chunk.doc_id + ", page " +
               std::to_string(d.chunk.page_number) + "):\n" + d.chunk.text;
    }
    return out;
}

namespace {

const char* kBaselinePrompt =
    "You are a financial analyst. Answer this question using ONLY the provided documents.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Retrieved Financial Documents:\n"
    "{formatted_docs}\n"
    "\n"
    "Instructions:\n"
    "- Use only the information in the provided documents\n"
    "- Use calculator for basic math operations\n"
    "- Use python_repl for complex calculations or data analysis\n"
    "- Show your calculations clearly\n"
    "- Cite document sources in your answer\n"
    "- If information is missing, state that clearly\n"
    "\n"
    "Provide a complete analysis with calculations and citations.";

const char* kNeurosymbolicPrompt =
    "You are a professional financial analyst. Answer this question using the provided "
    "documents.\n"
    "\n"
    "FINANCIAL VALIDATION RULES (for internal use only):\n"
    "\n"
    "{policy_rules}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Retrieved Financial Documents:\n"
    "{formatted_docs}\n"
    "\n"
    "Instructions:\n"
    "- Provide a clear, concise financial analysis based solely on the provided documents\n"
    "- Use calculator for basic math operations and python_repl for complex calculations\n"
    "- Use the validation rules above to internally verify your calculations (DO NOT mention "
    "rule IDs or validation details in your response)\n"
    "- Present a professional analysis focused on business insights\n"
    "- Cite document sources clearly\n"
    "- If calculations don't align with validation rules, note any discrepancies briefly\n"
    "- Keep your response focused and avoid unnecessary technical details\n"
    "\n"
    "Your response should read like a professional financial report, not a technical "
    "validation log.";

const char* kRagOnlyPrompt =
    "You are a financial analyst. Answer the following question using ONLY the information "
    "provided in the retrieved documents.\n"
    "\n"
    "Question: {query}\n"
    "\n"
    "Retrieved Documents:\n"
    "{context}\n"
    "\n"
    "Instructions:\n"
    "- Provide specific numerical answers when requested\n"
    "- Cite the document source when possible\n"
    "- If the information is not available in the documents, state that clearly\n"
    "- Show calculations when relevant\n"
    "- Focus only on information from the retrieved documents\n"
    "\n"
    "Answer:";

void substitute(std::string& text, const std::string& placeholder, const std::string& value) {
    size_t pos = text.find(placeholder);
    if (pos == std::string::npos) {
        throw std::runtime_error("prompt template has no placeholder " + placeholder);
    }
    text.replace(pos, placeholder.size(), value);
}

}  // namespace

std::string assemble_prompt(PromptKind kind, const std::string& question,
                            const std::vector<PromptDoc>& docs,
                            const std::optional<std::string>& policy_context) {
    if (kind != PromptKind::NeurosymbolicAgent && policy_context) {
        throw std::invalid_argument("policy_context is only valid for the neurosymbolic prompt");
    }
    if (docs.empty()) {
        throw std::invalid_argument("assemble_prompt requires at least one document");
    }
    std::string formatted = format_documents(docs);
    switch (kind) {
        case PromptKind::RagOnly: {
            std::string out = kRagOnlyPrompt;
            substitute(out, "{query}", question);
            substitute(out, "{context}", formatted);
            return out;
        }
        case PromptKind::BaselineAgent: {
            std::string out = kBaselinePrompt;
            substitute(out, "{question}", question);
            substitute(out, "{formatted_docs}", formatted);
            return out;
        }
        case PromptKind::NeurosymbolicAgent: {
            if (!policy_context) {
                throw std::invalid_argument("neurosymbolic prompt requires policy_context");
            }
            // The policy block carries its own in-prompt header; strip the
            // plain header produced by format_policy_context.
            std::string rules = *policy_context;
            const std::string header = "FINANCIAL VALIDATION RULES:";
            if (rules.rfind(header, 0) == 0) {
                rules.erase(0, header.size());
                if (!rules.empty() && rules.front() == '\n') rules.erase(0, 1);
            }
            std::string out = kNeurosymbolicPrompt;
            substitute(out, "{policy_rules}", rules);
            substitute(out, "{question}", question);
            substitute(out, "{formatted_docs}", formatted);
            return out;
        }
    }
    throw std::invalid_argument("unknown prompt kind");
}

// --- clients ---------------------------------------------------------------

ScriptedLlmClient ScriptedLlmClient::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open LLM script: " + path);
    json doc = json::parse(in);
    std::vector<ModelTurn> turns;
    for (const auto& entry : doc) {
        ModelTurn turn;
        turn.text = entry.value("text", std::string{});
        for (const auto& call : entry.value("tool_calls", json::array())) {
            ToolCall tc;
            tc.call_id = call.at("id").get<std::string>();
            tc.name = call.at("name").get<std::string>();
            tc.arguments = call.value("arguments", json::object());
            turn.tool_calls.push_back(std::move(tc));
        }
        turns.push_back(std::move(turn));
    }
    return ScriptedLlmClient(std::move(turns));
}

ModelTurn ScriptedLlmClient::chat(const std::vector<ChatMessage>&, const std::vector<ToolSpec>&) {
    if (next_ >= turns_.size()) {
        throw std::runtime_error("scripted LLM client exhausted after " +
                                 std::to_string(turns_.size()) + " turns");
    }
    return turns_[next_++];
}

ModelTurn MockLlmClient::chat(const std::vector<ChatMessage>& messages,
                              const std::vector<ToolSpec>&) {
    // Answer from the first retrieved document in the latest user message.
    std::string prompt;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") {
            prompt = it->content;
            break;
        }
    }
    static const std::regex doc_re(
        R"(Document [0-9]+ \(([^,]+), page ([0-9]+)\):\n((?:[^\n]|\n(?!\n))*))");
    std::smatch m;
    ModelTurn turn;
    if (std::regex_search(prompt, m, doc_re)) {
        turn.text = "Based on the retrieved documents: " + m[3].str() + "\n\nSource: (" +
                    m[1].str() + ", page " + m[2].str() + ")";
    } else {
        turn.text = "The provided documents do not contain the requested information.";
    }
    return turn;
}

ModelTurn HttpLlmClient::chat(const std::vector<ChatMessage>& messages,
                              const std::vector<ToolSpec>& tool_specs) {
    json body;
    body["messages"] = json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    body["tools"] = json::array();
    for (const auto& spec : tool_specs) {
        body["tools"].push_back({{"name", spec.name},
                                 {"description", spec.description},
                                 {"parameters", spec.parameter_schema}});
    }
    body["temperature"] = temperature_;
    body["max_tokens"] = max_tokens_;
    httplib::Client client(host_, port_);
    auto res = client.Post("/chat", body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw std::runtime_error("LLM service request failed");
    }
    json reply = json::parse(res->body);
    ModelTurn turn;
    turn.text = reply.value("text", std::string{});
    for (const auto& call : reply.value("tool_calls", json::array())) {
        turn.tool_calls.push_back({call.at("id").get<std::string>(),
                                   call.at("name").get<std::string>(),
                                   call.value("arguments", json::object())});
    }
    return turn;
}

// --- web search ------------------------------------------------------------

namespace {

std::string normalize_query(const std::string& query) {
    std::string out;
    bool in_space = true;
    for (char c : query) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

FixtureSearchClient::FixtureSearchClient(const std::string& fixture_path) {
    std::ifstream in(fixture_path);
    if (!in) throw std::runtime_error("cannot open search fixture: " + fixture_path);
    json doc = json::parse(in);
    for (const auto& [query, results] : doc.items()) {
        std::vector<SearchResult> list;
        for (const auto& r : results) {
            list.push_back({r.at("title").get<std::string>(), r.at("url").get<std::string>(),
                            r.at("snippet").get<std::string>()});
        }
        fixtures_[normalize_query(query)] = std::move(list);
    }
}

std::vector<SearchResult> FixtureSearchClient::search(const std::string& query,
                                                      size_t max_results) {
    auto it = fixtures_.find(normalize_query(query));
    if (it == fixtures_.end()) return {};
    auto results = it->second;
    if (results.size() > max_results) results.resize(max_results);
    return results;
}

// --- tools -----------------------------------------------------------------

void ToolRegistry::register_tool(ToolSpec spec, ToolFn fn) {
    if (tools_.count(spec.name)) {
        throw std::runtime_error("duplicate tool name: " + spec.name);
    }
    tools_[spec.name] = std::move(fn);
    specs_.push_back(std::move(spec));
}

ToolOutput ToolRegistry::invoke(const ToolCall& call) const {
    auto it = tools_.find(call.name);
    if (it == tools_.end()) {
        return {call.call_id, false, "unknown tool: " + call.name};
    }
    try {
        return {call.call_id, true, it->second(call.arguments)};
    } catch (const std::exception& e) {
        return {call.call_id, false, e.what()};
    }
}

ToolRegistry make_default_tools(std::shared_ptr<SearchClient> search, size_t search_max_results) {
    ToolRegistry registry;
    registry.register_tool(
        {"calculator", "Evaluate a basic arithmetic expression exactly.",
         {{"type", "object"},
          {"properties", {{"expression", {{"type", "string"}}}}},
          {"required", {"expression"}}}},
        [](const json& args) { return tool_calculator(args.at("expression").get<std::string>()); });
    registry.register_tool(
        {"code_eval", "Run a small numeric program; the final expression is printed.",
         {{"type", "object"},
          {"properties", {{"program", {{"type", "string"}}}}},
          {"required", {"program"}}}},
        [](const json& args) { return tool_code_eval(args.at("program").get<std::string>()); });
    registry.register_tool(
        {"web_search", "Search the web for additional financial data.",
         {{"type", "object"},
          {"properties", {{"query", {{"type", "string"}}}}},
          {"required", {"query"}}}},
        [search, search_max_results](const json& args) {
            if (!search) throw std::runtime_error("web search client is not configured");
            auto results =
                search->search(args.at("query").get<std::string>(), search_max_results);
            json out = json::array();
            for (const auto& r : results) {
                out.push_back({{"title", r.title}, {"url", r.url}, {"snippet", r.snippet}});
            }
            return out.dump();
        });
    return registry;
}

// --- agent loop ------------------------------------------------------------

const ModelTurn& AgentTranscript::final_turn() const {
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
        if (it->kind == TranscriptEvent::Model) return it->model_turn;
    }
    throw std::runtime_error("transcript has no model turn");
}

json AgentTranscript::to_json() const {
    json out;
    out["iterations"] = iterations;
    out["truncated"] = truncated;
    out["events"] = json::array();
    for (const auto& event : events) {
        if (event.kind == TranscriptEvent::Model) {
            json calls = json::array();
            for (const auto& call : event.model_turn.tool_calls) {
                calls.push_back(
                    {{"id", call.call_id}, {"name", call.name}, {"arguments", call.arguments}});
            }
            out["events"].push_back(
                {{"type", "model"}, {"text", event.model_turn.text}, {"tool_calls", calls}});
        } else {
            out["events"].push_back({{"type", "tool"},
                                     {"call_id", event.tool_output.call_id},
                                     {"success", event.tool_output.success},
                                     {"payload", event.tool_output.payload}});
        }
    }
    return out;
}

AgentTranscript run_agent(const std::string& prompt, const ToolRegistry& tools, LlmClient& llm,
                          int max_iterations) {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    AgentTranscript transcript;
    std::vector<ChatMessage> messages = {{"user", prompt}};
    for (int iteration = 1; iteration <= max_iterations; ++iteration) {
        ModelTurn turn;
        try {
            turn = llm.chat(messages, tools.specs());
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("LLM client failed after ") +
                                     std::to_string(transcript.iterations) + " iterations: " +
                                     e.what());
        }
        transcript.iterations = iteration;
        transcript.events.push_back({TranscriptEvent::Model, turn, {}});
        if (turn.tool_calls.empty()) return transcript;
        messages.push_back({"assistant", turn.text});
        for (const auto& call : turn.tool_calls) {
            ToolOutput output = tools.invoke(call);
            messages.push_back({"tool", json({{"call_id", output.call_id},
                                              {"success", output.success},
                                              {"payload", output.payload}})
                                            .dump()});
            transcript.events.push_back({TranscriptEvent::Tool, {}, std::move(output)});
        }
    }
    transcript.truncated = true;
    return transcript;
}

std::vector<std::pair<std::string, int>> parse_citations(const std::string& text) {
    static const std::regex cite_re(R"(\(([A-Za-z0-9_.:\-]+), page ([0-9]+)\))");
    std::vector<std::pair<std::string, int>> citations;
    std::set<std::pair<std::string, int>> seen;
    auto begin = std::sregex_iterator(text.begin(), text.end(), cite_re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::pair<std::string, int> cite{(*it)[1].str(), std::stoi((*it)[2].str())};
        if (seen.insert(cite).second) citations.push_back(cite);
    }
    return citations;
}

std::string extract_answer(const json& response) {
    auto stringify = [](const json& value) {
        return value.is_string() ? value.get<std::string>() : value.dump();
    };
    if (response.is_object()) {
        for (const char* key : {"message", "content", "text", "answer"}) {
            if (response.contains(key)) return stringify(response[key]);
        }
    }
    return stringify(response);
}

}  // namespace verafi
