#include "verafi/rerank.hpp"

#include "verafi/tokenize.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <set>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

std::vector<double> MockReranker::score_pairs(const std::string& query,
                                              const std::vector<std::string>& passages) {
    auto qtokens = tokenize(query);
    std::set<std::string> qset(qtokens.begin(), qtokens.end());
    std::vector<double> scores;
    scores.reserve(passages.size());
    for (const auto& passage : passages) {
        auto ptokens = tokenize(passage);
        std::set<std::string> pset(ptokens.begin(), ptokens.end());
        size_t inter = 0;
        for (const auto& t : qset) inter += pset.count(t);
        size_t uni = qset.size() + pset.size() - inter;
        scores.push_back(uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni));
    }
    return scores;
}

std::vector<double> HttpReranker::score_pairs(const std::string& query,
                                              const std::vector<std::string>& passages) {
    httplib::Client client(host_, port_);
    json body = {{"query", query}, {"passages", passages}};
    auto res = client.Post("/rerank", body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw std::runtime_error("reranker service request failed");
    }
    auto scores = json::parse(res->body).at("scores").get<std::vector<double>>();
    if (scores.size() != passages.size()) {
        throw std::runtime_error("reranker returned wrong score count");
    }
    return scores;
}

std::vector<RerankedResult> rerank(const std::string& query,
                                   const std::vector<RetrievalCandidate>& candidates,
                                   const std::map<std::string, std::string>& chunk_texts,
                                   RerankerClient& client, size_t k) {
    std::vector<std::string> passages;
    passages.reserve(candidates.size());
    for (const auto& cand : candidates) {
        auto it = chunk_texts.find(cand.chunk_id);
        if (it == chunk_texts.end()) {
            throw std::runtime_error("rerank failed for query \"" + query +
                                     "\": no text for candidate " + cand.chunk_id);
        }
        passages.push_back(it->second);
    }
    std::vector<double> scores;
    try {
        scores = client.score_pairs(query, passages);
    } catch (const std::exception& e) {
        throw std::runtime_error("rerank failed for query \"" + query + "\" over " +
                                 std::to_string(candidates.size()) + " candidates: " + e.what());
    }
    if (scores.size() != candidates.size()) {
        throw std::runtime_error("rerank: score count does not match candidate count");
    }
    std::vector<RerankedResult> results;
    results.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        results.push_back({candidates[i].chunk_id, scores[i], 0, candidates[i].rank});
    }
    std::sort(results.begin(), results.end(), [](const RerankedResult& a, const RerankedResult& b) {
        if (a.cross_score != b.cross_score) return a.cross_score > b.cross_score;
        if (a.original_rank != b.original_rank) return a.original_rank < b.original_rank;
        return a.chunk_id < b.chunk_id;
    });
    if (results.size() > k) results.resize(k);
    for (size_t i = 0; i < results.size(); ++i) results[i].rank = static_cast<int>(i) + 1;
    return results;
}

}  // namespace verafi
