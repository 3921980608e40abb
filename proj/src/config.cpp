#include "verafi/config.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed config " + path + ": " + e.what());
    }
    PipelineConfig cfg;
    if (doc.contains("chunking")) {
        const auto& c = doc["chunking"];
        cfg.chunking.chunk_size = c.value("chunk_size", cfg.chunking.chunk_size);
        cfg.chunking.overlap = c.value("overlap", cfg.chunking.overlap);
        if (c.contains("separators")) {
            cfg.chunking.separator_hierarchy = c["separators"].get<std::vector<std::string>>();
        }
    }
    if (doc.contains("retrieval")) {
        const auto& r = doc["retrieval"];
        cfg.retrieval.k_dense = r.value("k_dense", cfg.retrieval.k_dense);
        cfg.retrieval.k_final = r.value("k_final", cfg.retrieval.k_final);
        cfg.retrieval.bm25_k1 = r.value("bm25_k1", cfg.retrieval.bm25_k1);
        cfg.retrieval.bm25_b = r.value("bm25_b", cfg.retrieval.bm25_b);
        cfg.retrieval.rrf_k = r.value("rrf_k", cfg.retrieval.rrf_k);
        cfg.retrieval.embed_dim = r.value("embed_dim", cfg.retrieval.embed_dim);
        cfg.retrieval.query_instruction =
            r.value("query_instruction", cfg.retrieval.query_instruction);
    }
    if (doc.contains("policy")) {
        const auto& p = doc["policy"];
        cfg.policy.path = p.value("path", cfg.policy.path);
        cfg.policy.max_rules = p.value("max_rules", cfg.policy.max_rules);
        cfg.policy.epsilon = p.value("epsilon", cfg.policy.epsilon);
    }
    if (doc.contains("agent")) {
        const auto& a = doc["agent"];
        cfg.agent.template_kind = a.value("template", cfg.agent.template_kind);
        cfg.agent.max_iterations = a.value("max_iterations", cfg.agent.max_iterations);
        cfg.agent.temperature = a.value("temperature", cfg.agent.temperature);
        cfg.agent.max_tokens = a.value("max_tokens", cfg.agent.max_tokens);
    }
    if (doc.contains("clients")) {
        const auto& c = doc["clients"];
        cfg.clients.embedder = c.value("embedder", cfg.clients.embedder);
        cfg.clients.reranker = c.value("reranker", cfg.clients.reranker);
        cfg.clients.llm = c.value("llm", cfg.clients.llm);
        cfg.clients.judge = c.value("judge", cfg.clients.judge);
        cfg.clients.search = c.value("search", cfg.clients.search);
    }
    if (doc.contains("paths")) {
        const auto& p = doc["paths"];
        cfg.paths.corpus = p.value("corpus", cfg.paths.corpus);
        cfg.paths.snapshot = p.value("snapshot", cfg.paths.snapshot);
        cfg.paths.dataset = p.value("dataset", cfg.paths.dataset);
        cfg.paths.report = p.value("report", cfg.paths.report);
    }
    cfg.gold_granularity = doc.value("gold_granularity", cfg.gold_granularity);
    if (cfg.retrieval.k_final > cfg.retrieval.k_dense) {
        throw std::runtime_error("config: k_final must be <= k_dense");
    }
    if (cfg.chunking.overlap >= cfg.chunking.chunk_size) {
        throw std::runtime_error("config: overlap must be < chunk_size");
    }
    return cfg;
}

}  // namespace verafi
