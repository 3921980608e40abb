#include "verafi/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

namespace {

std::pair<std::string, int> parse_host_port(const std::string& selector) {
    // "http:host:port"
    size_t first = selector.find(':');
    size_t last = selector.rfind(':');
    if (first == std::string::npos || last == first) {
        throw std::runtime_error("bad http client selector: " + selector);
    }
    return {selector.substr(first + 1, last - first - 1),
            std::stoi(selector.substr(last + 1))};
}

std::shared_ptr<LlmClient> make_llm(const std::string& selector, const AgentConfig& agent,
                                    bool judge) {
    if (selector == "mock") {
        if (judge) return std::make_shared<MockJudgeClient>();
        return std::make_shared<MockLlmClient>();
    }
    if (selector.rfind("scripted:", 0) == 0) {
        return std::make_shared<ScriptedLlmClient>(
            ScriptedLlmClient::from_json_file(selector.substr(9)));
    }
    if (selector.rfind("http:", 0) == 0) {
        auto [host, port] = parse_host_port(selector);
        return std::make_shared<HttpLlmClient>(host, port, agent.temperature, agent.max_tokens);
    }
    throw std::runtime_error("unknown llm client selector: " + selector);
}

}  // namespace

ClientBundle make_clients(const PipelineConfig& config) {
    ClientBundle bundle;
    const auto& c = config.clients;
    if (c.embedder == "mock") {
        bundle.embedder = std::make_shared<MockEmbedder>(config.retrieval.embed_dim);
    } else if (c.embedder.rfind("http:", 0) == 0) {
        auto [host, port] = parse_host_port(c.embedder);
        bundle.embedder = std::make_shared<HttpEmbedder>(host, port, config.retrieval.embed_dim);
    } else {
        throw std::runtime_error("unknown embedder selector: " + c.embedder);
    }
    if (c.reranker == "mock") {
        bundle.reranker = std::make_shared<MockReranker>();
    } else if (c.reranker.rfind("http:", 0) == 0) {
        auto [host, port] = parse_host_port(c.reranker);
        bundle.reranker = std::make_shared<HttpReranker>(host, port);
    } else {
        throw std::runtime_error("unknown reranker selector: " + c.reranker);
    }
    bundle.llm = make_llm(c.llm, config.agent, false);
    bundle.judge = make_llm(c.judge, config.agent, true);
    if (!c.search.empty()) {
        if (c.search.rfind("fixture:", 0) == 0) {
            bundle.search = std::make_shared<FixtureSearchClient>(c.search.substr(8));
        } else {
            throw std::runtime_error("unknown search client selector: " + c.search);
        }
    }
    return bundle;
}

Pipeline::Pipeline(PipelineConfig config, IndexSnapshot snapshot, ClientBundle clients)
    : config_(std::move(config)), snapshot_(std::move(snapshot)), clients_(std::move(clients)) {
    bm25_ = snapshot_.build_bm25();
    for (const auto& chunk : snapshot_.chunks) {
        chunk_texts_[chunk.chunk_id] = chunk.text;
        chunk_by_id_[chunk.chunk_id] = &chunk;
    }
    if (!config_.policy.path.empty()) {
        policies_ = load_policies(config_.policy.path);
    }
}

const std::vector<std::string>& Pipeline::default_retrieval_methods() {
    static const std::vector<std::string> methods = {"Dense+Rerank", "Dense",  "BM25+Rerank",
                                                     "Hybrid+Rerank", "BM25", "Hybrid"};
    return methods;
}

const std::vector<std::string>& Pipeline::default_generation_configurations() {
    static const std::vector<std::string> configurations = {"rag-only", "agent",
                                                            "agent+neurosymbolic"};
    return configurations;
}

std::vector<std::string> Pipeline::retrieve(const std::string& question,
                                            const std::string& method) const {
    std::string base = method;
    bool use_rerank = false;
    const std::string suffix = "+Rerank";
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        use_rerank = true;
        base = base.substr(0, base.size() - suffix.size());
    }
    const size_t k = config_.retrieval.k_dense;
    std::vector<RetrievalCandidate> candidates;
    if (base == "Dense") {
        auto query = clients_.embedder->embed_query(question, config_.retrieval.query_instruction);
        candidates = dense_search(snapshot_.dense, query, k);
    } else if (base == "BM25") {
        candidates = bm25_search(bm25_, question, k);
    } else if (base == "Hybrid") {
        auto query = clients_.embedder->embed_query(question, config_.retrieval.query_instruction);
        candidates = hybrid_search(dense_search(snapshot_.dense, query, k),
                                   bm25_search(bm25_, question, k), k, config_.retrieval.rrf_k);
    } else {
        throw std::runtime_error("unknown retrieval method: " + method);
    }
    std::vector<std::string> ranked;
    if (use_rerank) {
        auto reranked = rerank(question, candidates, chunk_texts_, *clients_.reranker,
                               config_.retrieval.k_final);
        for (const auto& r : reranked) ranked.push_back(r.chunk_id);
    } else {
        for (const auto& c : candidates) ranked.push_back(c.chunk_id);
    }
    return ranked;
}

std::vector<RerankedResult> Pipeline::stage1(const std::string& question,
                                             std::vector<StageEvent>* trace) const {
    auto query = clients_.embedder->embed_query(question, config_.retrieval.query_instruction);
    auto candidates = dense_search(snapshot_.dense, query, config_.retrieval.k_dense);
    if (trace) {
        trace->push_back({"dense_search", "k=" + std::to_string(config_.retrieval.k_dense)});
    }
    auto reranked =
        rerank(question, candidates, chunk_texts_, *clients_.reranker, config_.retrieval.k_final);
    if (trace) {
        trace->push_back({"rerank", "k=" + std::to_string(config_.retrieval.k_final)});
    }
    return reranked;
}

std::string Pipeline::answer_with(const std::string& template_kind, const std::string& question,
                                  const std::vector<RerankedResult>& retrieved,
                                  std::vector<StageEvent>* trace,
                                  AgentTranscript* transcript_out) const {
    std::vector<PromptDoc> docs;
    for (const auto& r : retrieved) {
        auto it = chunk_by_id_.find(r.chunk_id);
        if (it == chunk_by_id_.end()) {
            throw std::runtime_error("retrieved chunk missing from snapshot: " + r.chunk_id);
        }
        docs.push_back({*it->second, r.rank});
    }

    PromptKind kind;
    std::optional<std::string> policy_context;
    if (template_kind == "rag-only") {
        kind = PromptKind::RagOnly;
    } else if (template_kind == "agent" || template_kind == "baseline") {
        kind = PromptKind::BaselineAgent;
    } else if (template_kind == "agent+neurosymbolic" || template_kind == "neurosymbolic") {
        kind = PromptKind::NeurosymbolicAgent;
        if (!policies_) {
            throw std::runtime_error("neurosymbolic template requires a policy file");
        }
        policy_context = format_policy_context(*policies_, config_.policy.max_rules);
        if (trace) {
            trace->push_back({"policy_loading",
                              "rules=" + std::to_string(policies_->rules.size()) +
                                  " max_rules=" + std::to_string(config_.policy.max_rules)});
        }
    } else {
        throw std::runtime_error("unknown template kind: " + template_kind);
    }

    std::string prompt = assemble_prompt(kind, question, docs, policy_context);
    ToolRegistry tools;
    if (kind != PromptKind::RagOnly) {
        tools = make_default_tools(clients_.search);
    }
    AgentTranscript transcript =
        run_agent(prompt, tools, *clients_.llm, config_.agent.max_iterations);
    if (trace) {
        trace->push_back({"agent_loop",
                          "iterations=" + std::to_string(transcript.iterations)});
    }
    json response = {{"message", transcript.final_turn().text}};
    std::string answer = extract_answer(response);
    if (trace) trace->push_back({"extract_answer", ""});
    if (transcript_out) *transcript_out = std::move(transcript);
    return answer;
}

AskResult Pipeline::ask(const std::string& question) const {
    if (question.empty()) throw std::invalid_argument("question must be non-empty");
    AskResult result;
    // Algorithm order: policy loading precedes retrieval, so format the
    // policy context eagerly for the trace even though only the prompt
    // assembly consumes it.
    if (config_.agent.template_kind == "neurosymbolic" ||
        config_.agent.template_kind == "agent+neurosymbolic") {
        if (!policies_) {
            throw std::runtime_error("neurosymbolic template requires a policy file");
        }
        result.trace.push_back({"policy_loading",
                                "rules=" + std::to_string(policies_->rules.size()) +
                                    " max_rules=" + std::to_string(config_.policy.max_rules)});
    }
    result.retrieved = stage1(question, &result.trace);
    std::vector<StageEvent> agent_trace;
    std::string answer = answer_with(config_.agent.template_kind, question, result.retrieved,
                                     &agent_trace, &result.transcript);
    for (auto& event : agent_trace) {
        if (event.stage != "policy_loading") result.trace.push_back(std::move(event));
    }
    result.answer.text = answer;
    result.answer.cited_sources = parse_citations(answer);
    return result;
}

EvaluationReport Pipeline::run_retrieval_comparison(const std::vector<QueryRecord>& dataset,
                                                    const std::vector<std::string>& methods) const {
    const size_t k = config_.retrieval.k_final;
    GoldGranularity granularity = config_.gold_granularity == "document"
                                      ? GoldGranularity::Document
                                      : GoldGranularity::Chunk;
    EvaluationReport report;
    std::string ks = std::to_string(k);
    report.columns = {"recall@" + ks, "ndcg@" + ks, "mrr@" + ks, "hit@" + ks};
    report.gold_granularity = config_.gold_granularity;
    for (const auto& method : methods) {
        ReportRow row;
        row.method = method;
        double recall = 0, ndcg = 0, mrr = 0, hit = 0;
        for (const auto& query : dataset) {
            try {
                auto ranked = retrieve(query.question, method);
                auto m = compute_retrieval_metrics(ranked, query.gold_evidence, k, granularity);
                recall += m.recall_at_k;
                ndcg += m.ndcg_at_k;
                mrr += m.mrr_at_k;
                hit += m.hit_at_k;
                ++row.queries_scored;
            } catch (const std::exception& e) {
                ++row.queries_failed;
                report.errors.push_back(method + "/" + query.query_id + ": " + e.what());
            }
        }
        double n = row.queries_scored > 0 ? static_cast<double>(row.queries_scored) : 1.0;
        row.metrics[report.columns[0]] = recall / n;
        row.metrics[report.columns[1]] = ndcg / n;
        row.metrics[report.columns[2]] = mrr / n;
        row.metrics[report.columns[3]] = hit / n;
        report.rows.push_back(std::move(row));
    }
    return report;
}

EvaluationReport Pipeline::run_generation_comparison(
    const std::vector<QueryRecord>& dataset, const std::vector<std::string>& configurations) const {
    EvaluationReport report;
    report.columns = {"factual_correctness", "completeness"};
    report.gold_granularity = config_.gold_granularity;
    for (const auto& configuration : configurations) {
        ReportRow row;
        row.method = configuration;
        double factual = 0, complete = 0;
        for (const auto& query : dataset) {
            try {
                auto retrieved = stage1(query.question, nullptr);
                std::string answer =
                    answer_with(configuration, query.question, retrieved, nullptr, nullptr);
                std::vector<std::string> evidence;
                for (const auto& r : retrieved) evidence.push_back(chunk_texts_.at(r.chunk_id));
                auto verdict = judge_generation(query.question, answer, evidence,
                                                query.gold_answer, *clients_.judge);
                factual += verdict.factual_correctness;
                complete += verdict.completeness;
                ++row.queries_scored;
            } catch (const std::exception& e) {
                ++row.queries_failed;
                report.errors.push_back(configuration + "/" + query.query_id + ": " + e.what());
            }
        }
        double n = row.queries_scored > 0 ? static_cast<double>(row.queries_scored) : 1.0;
        row.metrics["factual_correctness"] = factual / n;
        row.metrics["completeness"] = complete / n;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace verafi
