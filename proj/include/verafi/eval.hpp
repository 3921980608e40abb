#pragma once

#include "verafi/agent.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace verafi {

struct QueryRecord {
    std::string query_id;
    std::string question;
    std::set<std::string> gold_evidence;  // chunk ids, or doc ids in doc-level mode
    std::string gold_answer;
};

// Line-delimited JSON records with fields query_id, question, gold_evidence,
// gold_answer.
std::vector<QueryRecord> load_dataset(const std::string& path);

struct RetrievalMetrics {
    double recall_at_k = 0.0;
    double ndcg_at_k = 0.0;
    double mrr_at_k = 0.0;
    double hit_at_k = 0.0;
    size_t k = 0;
};

enum class GoldGranularity { Chunk, Document };

// Binary-relevance Recall/NDCG/MRR/Hit over the top-k of `ranked`.
// NDCG uses a base-2 log discount with IDCG over min(|gold|, k) leading
// relevants. In document granularity a chunk is relevant when its doc_id
// prefix (up to ":p") is in gold.
RetrievalMetrics compute_retrieval_metrics(const std::vector<std::string>& ranked,
                                           const std::set<std::string>& gold, size_t k,
                                           GoldGranularity granularity = GoldGranularity::Chunk);

struct JudgeVerdict {
    std::string query_id;
    int factual_correctness = 0;  // binary
    int completeness = 0;         // binary
    std::string rationale;
};

// Renders the fixed judge prompt, sends it to the judge model, and parses
// the strict verdict block; parse failures are retried up to 2 times before
// throwing.
JudgeVerdict judge_generation(const std::string& question, const std::string& answer,
                              const std::vector<std::string>& evidence_texts,
                              const std::string& gold_answer, LlmClient& judge);

std::string render_judge_prompt(const std::string& question, const std::string& answer,
                                const std::vector<std::string>& evidence_texts,
                                const std::string& gold_answer);

// Deterministic offline judge: verdicts from token containment of the gold
// answer in the candidate answer.
class MockJudgeClient : public LlmClient {
public:
    ModelTurn chat(const std::vector<ChatMessage>& messages,
                   const std::vector<ToolSpec>& tool_specs) override;
};

struct ReportRow {
    std::string method;
    std::map<std::string, double> metrics;  // column -> mean value
    size_t queries_scored = 0;
    size_t queries_failed = 0;  // excluded from means
};

struct EvaluationReport {
    std::vector<std::string> columns;  // metric columns in output order
    std::vector<ReportRow> rows;
    std::string gold_granularity;
    std::vector<std::string> errors;  // per-query failure descriptions

    std::string to_table() const;
    nlohmann::json to_json() const;
};

}  // namespace verafi
