#include <doctest.h>

#include "verafi/rerank.hpp"

#include <map>
#include <string>
#include <vector>

using namespace verafi;

namespace {

// Scores 1.0 when the passage contains the query verbatim, else 0.0.
class SubstringReranker : public RerankerClient {
public:
    std::vector<double> score_pairs(const std::string& query,
                                    const std::vector<std::string>& passages) override {
        std::vector<double> scores;
        for (const auto& p : passages) {
            scores.push_back(p.find(query) != std::string::npos ? 1.0 : 0.0);
        }
        return scores;
    }
};

std::vector<RetrievalCandidate> candidates(const std::vector<std::string>& ids) {
    std::vector<RetrievalCandidate> out;
    for (size_t i = 0; i < ids.size(); ++i) {
        out.push_back({ids[i], 1.0 / static_cast<double>(i + 1), static_cast<int>(i + 1),
                       RetrievalMethod::Dense});
    }
    return out;
}

}  // namespace

TEST_CASE("rerank keeps the cross-encoder's best passage") {
    std::map<std::string, std::string> texts = {
        {"c1", "net income and dividends"},
        {"c2", "the quick ratio improved to 1.4"},
        {"c3", "capital expenditure plans"},
    };
    SubstringReranker client;
    auto results = rerank("quick ratio", candidates({"c1", "c2", "c3"}), texts, client, 1);
    REQUIRE(results.size() == 1);
    CHECK(results[0].chunk_id == "c2");
    CHECK(results[0].cross_score == 1.0);
    CHECK(results[0].rank == 1);
    CHECK(results[0].original_rank == 2);
}

TEST_CASE("mock reranker computes Jaccard token overlap") {
    MockReranker client;
    auto scores = client.score_pairs("a b", {"a c", "a b", "x y", "A  b!"});
    REQUIRE(scores.size() == 4);
    CHECK(scores[0] == doctest::Approx(1.0 / 3.0));
    CHECK(scores[1] == doctest::Approx(1.0));
    CHECK(scores[2] == doctest::Approx(0.0));
    CHECK(scores[3] == doctest::Approx(1.0));  // tokenization lowercases and strips punctuation
}

TEST_CASE("rerank ties break by original rank then chunk_id") {
    std::map<std::string, std::string> texts = {
        {"b", "same text"}, {"a", "same text"}, {"c", "same text"}};
    MockReranker client;
    auto results = rerank("same text", candidates({"b", "a", "c"}), texts, client, 3);
    REQUIRE(results.size() == 3);
    // All scores equal; dense order (b, a, c) is preserved.
    CHECK(results[0].chunk_id == "b");
    CHECK(results[1].chunk_id == "a");
    CHECK(results[2].chunk_id == "c");
    CHECK(results[0].rank == 1);
    CHECK(results[2].rank == 3);
}

TEST_CASE("rerank errors name the query") {
    std::map<std::string, std::string> texts;  // missing chunk text
    MockReranker client;
    CHECK_THROWS_WITH_AS(rerank("some query", candidates({"c1"}), texts, client, 1),
                         doctest::Contains("some query"), std::runtime_error);
}

TEST_CASE("rerank returns at most k results in score order") {
    std::map<std::string, std::string> texts = {
        {"c1", "alpha beta"}, {"c2", "alpha beta gamma"}, {"c3", "unrelated words"}};
    MockReranker client;
    auto results = rerank("alpha beta gamma", candidates({"c1", "c2", "c3"}), texts, client, 2);
    REQUIRE(results.size() == 2);
    CHECK(results[0].chunk_id == "c2");
    CHECK(results[1].chunk_id == "c1");
    CHECK(results[0].cross_score > results[1].cross_score);
}
