#pragma once

#include "verafi/agent.hpp"
#include "verafi/config.hpp"
#include "verafi/eval.hpp"
#include "verafi/policy.hpp"
#include "verafi/rerank.hpp"
#include "verafi/snapshot.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace verafi {

// Clients resolved from the config selector strings.
struct ClientBundle {
    std::shared_ptr<EmbedderClient> embedder;
    std::shared_ptr<RerankerClient> reranker;
    std::shared_ptr<LlmClient> llm;
    std::shared_ptr<LlmClient> judge;
    std::shared_ptr<SearchClient> search;
};

ClientBundle make_clients(const PipelineConfig& config);

struct StageEvent {
    std::string stage;
    std::string detail;
};

struct AskResult {
    AgentAnswer answer;
    AgentTranscript transcript;
    std::vector<RerankedResult> retrieved;
    std::vector<StageEvent> trace;  // stage ordering, for structured logging
};

class Pipeline {
public:
    Pipeline(PipelineConfig config, IndexSnapshot snapshot, ClientBundle clients);

    // Stage 1 (dense k=15 -> rerank k=3), Stage 2 (policy context + prompt +
    // agent loop), Stage 3 (answer extraction).
    AskResult ask(const std::string& question) const;

    // Retrieval rankings for one query under a Table-1 method label.
    std::vector<std::string> retrieve(const std::string& question,
                                      const std::string& method) const;

    // Table 1 protocol: the six retrieval methods over the dataset.
    EvaluationReport run_retrieval_comparison(const std::vector<QueryRecord>& dataset,
                                              const std::vector<std::string>& methods) const;

    // Table 2 protocol: generation configurations judged by the LLM judge.
    EvaluationReport run_generation_comparison(const std::vector<QueryRecord>& dataset,
                                               const std::vector<std::string>& configurations) const;

    const IndexSnapshot& snapshot() const { return snapshot_; }
    const PipelineConfig& config() const { return config_; }

    static const std::vector<std::string>& default_retrieval_methods();
    static const std::vector<std::string>& default_generation_configurations();

private:
    std::vector<RerankedResult> stage1(const std::string& question,
                                       std::vector<StageEvent>* trace) const;
    std::string answer_with(const std::string& template_kind, const std::string& question,
                            const std::vector<RerankedResult>& retrieved,
                            std::vector<StageEvent>* trace, AgentTranscript* transcript) const;

    PipelineConfig config_;
    IndexSnapshot snapshot_;
    Bm25Index bm25_;
    ClientBundle clients_;
    std::map<std::string, std::string> chunk_texts_;
    std::map<std::string, const DocumentChunk*> chunk_by_id_;
    std::optional<PolicySet> policies_;
};

}  // namespace verafi
