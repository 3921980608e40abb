#pragma once

#include "verafi/chunking.hpp"
#include "verafi/embedder.hpp"

#include <map>
#include <string>
#include <vector>

namespace verafi {

enum class RetrievalMethod { Dense, Bm25, Hybrid };

struct RetrievalCandidate {
    std::string chunk_id;
    double score = 0.0;
    int rank = 0;  // 1-based
    RetrievalMethod method = RetrievalMethod::Dense;
};

struct DenseIndex {
    // Sorted by chunk_id; iteration order is the scoring order.
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    size_t dim = 0;
};

struct Bm25Index {
    std::map<std::string, std::vector<std::pair<size_t, int>>> postings;  // term -> (entry idx, tf)
    std::vector<std::string> chunk_ids;  // sorted
    std::vector<int> doc_length;         // token count per entry
    double avg_doc_length = 0.0;
    double k1 = 1.2;
    double b = 0.75;
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

DenseIndex build_dense_index(const std::vector<DocumentChunk>& chunks, EmbedderClient& embedder);
Bm25Index build_bm25_index(const std::vector<DocumentChunk>& chunks, double k1 = 1.2,
                           double b = 0.75);

// Scores every entry against the query. The OpenMP variant is the production
// path; the serial variant is the reference kept for testing and benchmarks.
std::vector<double> dense_score_all(const DenseIndex& index, const EmbeddingVector& query);
std::vector<double> dense_score_all_serial(const DenseIndex& index, const EmbeddingVector& query);

// Top-k by cosine similarity; ties break by ascending chunk_id.
std::vector<RetrievalCandidate> dense_search(const DenseIndex& index, const EmbeddingVector& query,
                                             size_t k = 15);

// Okapi BM25 with IDF(t) = ln((N - df + 0.5)/(df + 0.5) + 1).
std::vector<RetrievalCandidate> bm25_search(const Bm25Index& index, const std::string& query_text,
                                            size_t k = 15);

// Reciprocal-rank fusion of two candidate lists: score(c) = sum over lists of
// 1/(rrf_k + rank); items absent from a list contribute 0 for it.
std::vector<RetrievalCandidate> hybrid_search(const std::vector<RetrievalCandidate>& dense,
                                              const std::vector<RetrievalCandidate>& lexical,
                                              size_t k = 15, double rrf_k = 60.0);

}  // namespace verafi
