#pragma once

#include "verafi/retrieval.hpp"

#include <map>
#include <string>
#include <vector>

namespace verafi {

// Cross-encoder service contract: scores are returned in passage order.
class RerankerClient {
public:
    virtual ~RerankerClient() = default;
    virtual std::vector<double> score_pairs(const std::string& query,
                                            const std::vector<std::string>& passages) = 0;
};

// Deterministic offline reranker: Jaccard token overlap between query and
// passage.
class MockReranker : public RerankerClient {
public:
    std::vector<double> score_pairs(const std::string& query,
                                    const std::vector<std::string>& passages) override;
};

// HTTP reranker speaking the JSON wire contract:
//   POST /rerank {"query": ..., "passages": [..]} -> {"scores": [..]}
class HttpReranker : public RerankerClient {
public:
    HttpReranker(std::string host, int port) : host_(std::move(host)), port_(port) {}
    std::vector<double> score_pairs(const std::string& query,
                                    const std::vector<std::string>& passages) override;

private:
    std::string host_;
    int port_;
};

struct RerankedResult {
    std::string chunk_id;
    double cross_score = 0.0;
    int rank = 0;           // 1-based after reranking
    int original_rank = 0;  // 1-based position from the dense stage
};

// Re-scores candidates with the cross-encoder and keeps the top k. Ties
// break by original dense rank, then chunk_id.
std::vector<RerankedResult> rerank(const std::string& query,
                                   const std::vector<RetrievalCandidate>& candidates,
                                   const std::map<std::string, std::string>& chunk_texts,
                                   RerankerClient& client, size_t k = 3);

}  // namespace verafi
