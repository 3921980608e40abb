#pragma once

#include "verafi/chunking.hpp"

#include <string>
#include <vector>

namespace verafi {

struct RetrievalConfig {
    size_t k_dense = 15;
    size_t k_final = 3;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    double rrf_k = 60.0;
    size_t embed_dim = 64;
    std::string query_instruction =
        "Given a financial question, retrieve passages from financial filings that answer it";
};

struct PolicyConfig {
    std::string path;
    size_t max_rules = 40;
    double epsilon = 1e-6;
};

struct AgentConfig {
    std::string template_kind = "neurosymbolic";  // rag-only | baseline | neurosymbolic
    int max_iterations = 10;
    double temperature = 0.0;
    int max_tokens = 4096;
};

// Client selector strings: "mock", "scripted:<path>" (llm/judge),
// "fixture:<path>" (search), "http:<host>:<port>".
struct ClientConfig {
    std::string embedder = "mock";
    std::string reranker = "mock";
    std::string llm = "mock";
    std::string judge = "mock";
    std::string search;  // empty = no web search tool backend
};

struct PathsConfig {
    std::string corpus;
    std::string snapshot = "out/index.json";
    std::string dataset;
    std::string report = "out/report";
};

struct PipelineConfig {
    ChunkingConfig chunking;
    RetrievalConfig retrieval;
    PolicyConfig policy;
    AgentConfig agent;
    ClientConfig clients;
    PathsConfig paths;
    std::string gold_granularity = "chunk";  // chunk | document
};

// Loads the JSON config file. Unset keys keep their defaults; k_final must
// not exceed k_dense.
PipelineConfig load_config(const std::string& path);

}  // namespace verafi
