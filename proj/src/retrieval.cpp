#include "verafi/retrieval.hpp"

#include "verafi/tokenize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace verafi {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw std::invalid_argument("cosine_similarity: zero-norm vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

DenseIndex build_dense_index(const std::vector<DocumentChunk>& chunks, EmbedderClient& embedder) {
    if (chunks.empty()) throw std::invalid_argument("build_dense_index: no chunks");
    DenseIndex index;
    index.dim = embedder.dim();
    std::set<std::string> seen;
    for (const auto& chunk : chunks) {
        if (!seen.insert(chunk.chunk_id).second) {
            throw std::runtime_error("duplicate chunk_id: " + chunk.chunk_id);
        }
        try {
            index.entries.emplace_back(chunk.chunk_id, embedder.embed_passage(chunk.text));
        } catch (const std::exception& e) {
            throw std::runtime_error("embedding failed for chunk " + chunk.chunk_id + ": " +
                                     e.what());
        }
    }
    std::sort(index.entries.begin(), index.entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return index;
}

Bm25Index build_bm25_index(const std::vector<DocumentChunk>& chunks, double k1, double b) {
    if (chunks.empty()) throw std::invalid_argument("build_bm25_index: no chunks");
    Bm25Index index;
    index.k1 = k1;
    index.b = b;
    std::vector<const DocumentChunk*> sorted;
    std::set<std::string> seen;
    for (const auto& chunk : chunks) {
        if (!seen.insert(chunk.chunk_id).second) {
            throw std::runtime_error("duplicate chunk_id: " + chunk.chunk_id);
        }
        sorted.push_back(&chunk);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const DocumentChunk* a, const DocumentChunk* b) { return a->chunk_id < b->chunk_id; });
    long long total = 0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        auto tokens = tokenize(sorted[i]->text);
        index.chunk_ids.push_back(sorted[i]->chunk_id);
        index.doc_length.push_back(static_cast<int>(tokens.size()));
        total += static_cast<long long>(tokens.size());
        std::map<std::string, int> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            index.postings[term].emplace_back(i, count);
        }
    }
    index.avg_doc_length = static_cast<double>(total) / static_cast<double>(sorted.size());
    return index;
}

std::vector<double> dense_score_all_serial(const DenseIndex& index, const EmbeddingVector& query) {
    std::vector<double> scores(index.entries.size());
    for (size_t i = 0; i < index.entries.size(); ++i) {
        scores[i] = cosine_similarity(index.entries[i].second, query);
    }
    return scores;
}

std::vector<double> dense_score_all(const DenseIndex& index, const EmbeddingVector& query) {
    std::vector<double> scores(index.entries.size());
    const long n = static_cast<long>(index.entries.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        scores[static_cast<size_t>(i)] = cosine_similarity(index.entries[static_cast<size_t>(i)].second, query);
    }
    return scores;
}

namespace {

// Takes (chunk_id, score) pairs to a ranked top-k list. Ties break by
// ascending chunk_id.
std::vector<RetrievalCandidate> rank_top_k(std::vector<std::pair<std::string, double>> scored,
                                           size_t k, RetrievalMethod method) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k) scored.resize(k);
    std::vector<RetrievalCandidate> result;
    int rank = 1;
    for (auto& [id, score] : scored) {
        result.push_back({std::move(id), score, rank++, method});
    }
    return result;
}

}  // namespace

std::vector<RetrievalCandidate> dense_search(const DenseIndex& index, const EmbeddingVector& query,
                                             size_t k) {
    if (query.dim() != index.dim) {
        throw std::invalid_argument("dense_search: query dimension mismatch");
    }
    auto scores = dense_score_all(index, query);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        scored.emplace_back(index.entries[i].first, scores[i]);
    }
    return rank_top_k(std::move(scored), k, RetrievalMethod::Dense);
}

std::vector<RetrievalCandidate> bm25_search(const Bm25Index& index, const std::string& query_text,
                                            size_t k) {
    auto terms = tokenize(query_text);
    if (terms.empty()) {
        throw std::invalid_argument("bm25_search: query tokenizes to no terms");
    }
    const double n_docs = static_cast<double>(index.chunk_ids.size());
    std::unordered_map<size_t, double> scores;
    for (const auto& term : terms) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        for (const auto& [doc, tf] : it->second) {
            const double dl = static_cast<double>(index.doc_length[doc]);
            const double denom =
                tf + index.k1 * (1.0 - index.b + index.b * dl / index.avg_doc_length);
            scores[doc] += idf * tf * (index.k1 + 1.0) / denom;
        }
    }
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [doc, score] : scores) {
        scored.emplace_back(index.chunk_ids[doc], score);
    }
    auto result = rank_top_k(std::move(scored), k, RetrievalMethod::Bm25);
    return result;
}

std::vector<RetrievalCandidate> hybrid_search(const std::vector<RetrievalCandidate>& dense,
                                              const std::vector<RetrievalCandidate>& lexical,
                                              size_t k, double rrf_k) {
    std::map<std::string, double> fused;
    for (const auto* list : {&dense, &lexical}) {
        for (const auto& cand : *list) {
            fused[cand.chunk_id] += 1.0 / (rrf_k + static_cast<double>(cand.rank));
        }
    }
    std::vector<std::pair<std::string, double>> scored(fused.begin(), fused.end());
    return rank_top_k(std::move(scored), k, RetrievalMethod::Hybrid);
}

}  // namespace verafi
