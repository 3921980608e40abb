#include <doctest.h>

#include "verafi/eval.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

using namespace verafi;

TEST_CASE("worked metric example: gold {a}, ranked [b, a, c]") {
    auto m = compute_retrieval_metrics({"b", "a", "c"}, {"a"}, 3);
    CHECK(m.recall_at_k == 1.0);
    CHECK(m.hit_at_k == 1.0);
    CHECK(m.mrr_at_k == 0.5);
    CHECK(m.ndcg_at_k == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
    CHECK(m.ndcg_at_k == doctest::Approx(0.6309297535714574).epsilon(1e-9));
}

TEST_CASE("worked metric example: gold {a, d}, ranked [a, b, d]") {
    auto m = compute_retrieval_metrics({"a", "b", "d"}, {"a", "d"}, 3);
    CHECK(m.recall_at_k == 1.0);
    CHECK(m.hit_at_k == 1.0);
    CHECK(m.mrr_at_k == 1.0);
    double expected = (1.0 + 1.0 / 2.0) / (1.0 + 1.0 / std::log2(3.0));
    CHECK(m.ndcg_at_k == doctest::Approx(expected).epsilon(1e-12));
    CHECK(m.ndcg_at_k == doctest::Approx(0.9197207891481876).epsilon(1e-9));
}

TEST_CASE("metrics handle misses and truncation") {
    auto miss = compute_retrieval_metrics({"x", "y"}, {"a"}, 3);
    CHECK(miss.recall_at_k == 0.0);
    CHECK(miss.hit_at_k == 0.0);
    CHECK(miss.mrr_at_k == 0.0);
    CHECK(miss.ndcg_at_k == 0.0);

    // Only the top-k ranks count.
    auto deep = compute_retrieval_metrics({"x", "y", "z", "a"}, {"a"}, 3);
    CHECK(deep.recall_at_k == 0.0);

    // Partial recall with more gold than found.
    auto partial = compute_retrieval_metrics({"a", "x", "y"}, {"a", "b", "c"}, 3);
    CHECK(partial.recall_at_k == doctest::Approx(1.0 / 3.0));
    CHECK(partial.hit_at_k == 1.0);

    CHECK_THROWS_AS(compute_retrieval_metrics({"a"}, {}, 3), std::invalid_argument);
}

TEST_CASE("document granularity maps chunks to their documents") {
    std::set<std::string> gold = {"acme", "globex"};
    auto m = compute_retrieval_metrics({"acme:p1:c0", "acme:p2:c1", "initech:p1:c0"}, gold, 3,
                                       GoldGranularity::Document);
    // Two chunks of the same gold document count once for recall.
    CHECK(m.recall_at_k == 0.5);
    CHECK(m.hit_at_k == 1.0);
    CHECK(m.mrr_at_k == 1.0);
}

TEST_CASE("load_dataset parses records and rejects duplicates") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "verafi_dataset_test";
    fs::create_directories(dir);
    fs::path good = dir / "ds.jsonl";
    std::ofstream(good) << R"({"query_id": "q1", "question": "Q?", "gold_evidence": ["a:p1:c0"], "gold_answer": "A."})"
                        << "\n";
    auto records = load_dataset(good.string());
    REQUIRE(records.size() == 1);
    CHECK(records[0].query_id == "q1");
    CHECK(records[0].gold_evidence == std::set<std::string>{"a:p1:c0"});

    fs::path dup = dir / "dup.jsonl";
    {
        std::ofstream out(dup);
        out << R"({"query_id": "q1", "question": "Q?", "gold_evidence": ["a"], "gold_answer": ""})" << "\n";
        out << R"({"query_id": "q1", "question": "Q?", "gold_evidence": ["b"], "gold_answer": ""})" << "\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(dup.string()), doctest::Contains("record 1"),
                         std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("judge prompt carries the fixed grading structure") {
    std::string prompt = render_judge_prompt("Q?", "my answer", {"ev1", "ev2"}, "gold answer");
    CHECK(prompt.find("Question: Q?") != std::string::npos);
    CHECK(prompt.find("Reference answer: gold answer") != std::string::npos);
    CHECK(prompt.find("[1] ev1") != std::string::npos);
    CHECK(prompt.find("[2] ev2") != std::string::npos);
    CHECK(prompt.find("Candidate answer:\nmy answer") != std::string::npos);
    CHECK(prompt.find("VERDICT:") != std::string::npos);
}

namespace {

// Replays canned judge replies; counts the calls made.
class ReplyingJudge : public LlmClient {
public:
    explicit ReplyingJudge(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    ModelTurn chat(const std::vector<ChatMessage>&, const std::vector<ToolSpec>&) override {
        ModelTurn turn;
        turn.text = calls_ < replies_.size() ? replies_[calls_] : replies_.back();
        ++calls_;
        return turn;
    }
    size_t calls_ = 0;

private:
    std::vector<std::string> replies_;
};

}  // namespace

TEST_CASE("judge_generation parses the verdict block and retries on garbage") {
    ReplyingJudge clean({"VERDICT:\nfactual: 1\ncomplete: 0\nrationale: close enough"});
    auto verdict = judge_generation("Q?", "A", {}, "gold", clean);
    CHECK(verdict.factual_correctness == 1);
    CHECK(verdict.completeness == 0);
    CHECK(verdict.rationale == "close enough");

    ReplyingJudge flaky({"no verdict here",
                         "VERDICT:\nfactual: 0\ncomplete: 1\nrationale: second try"});
    verdict = judge_generation("Q?", "A", {}, "gold", flaky);
    CHECK(verdict.factual_correctness == 0);
    CHECK(verdict.completeness == 1);
    CHECK(flaky.calls_ == 2);

    ReplyingJudge hopeless({"still nothing"});
    CHECK_THROWS_AS(judge_generation("Q?", "A", {}, "gold", hopeless), std::runtime_error);
    CHECK(hopeless.calls_ == 3);
}

TEST_CASE("an answer matching the reference scores (1,1) under the offline judge") {
    MockJudgeClient judge;
    auto verdict = judge_generation("Q?", "Revenue was 10 million dollars.", {"evidence"},
                                    "Revenue was 10 million dollars.", judge);
    CHECK(verdict.factual_correctness == 1);
    CHECK(verdict.completeness == 1);

    // Half the reference covered: incomplete containment fails factuality
    // but passes completeness.
    verdict = judge_generation("Q?", "Revenue was 10", {}, "Revenue was 10 million dollars",
                               judge);
    CHECK(verdict.factual_correctness == 0);
    CHECK(verdict.completeness == 1);

    verdict = judge_generation("Q?", "No idea.", {}, "Revenue was 10 million dollars", judge);
    CHECK(verdict.factual_correctness == 0);
    CHECK(verdict.completeness == 0);
}

TEST_CASE("report table formatting") {
    EvaluationReport report;
    report.columns = {"recall@3", "ndcg@3", "mrr@3", "hit@3"};
    ReportRow row;
    row.method = "Dense+Rerank";
    row.metrics = {{"recall@3", 0.5}, {"ndcg@3", 0.25}, {"mrr@3", 1.0 / 3.0}, {"hit@3", 1.0}};
    row.queries_scored = 2;
    report.rows.push_back(row);
    ReportRow failed = row;
    failed.method = "BM25";
    failed.queries_failed = 1;
    report.rows.push_back(failed);

    std::string table = report.to_table();
    CHECK(table ==
          "method\trecall@3\tndcg@3\tmrr@3\thit@3\n"
          "Dense+Rerank\t0.500\t0.250\t0.333\t1.000\n"
          "BM25\t0.500\t0.250\t0.333\t1.000\t(1 queries excluded)\n");

    auto j = report.to_json();
    CHECK(j["rows"][0]["method"] == "Dense+Rerank");
    CHECK(j["rows"][1]["queries_excluded"] == 1);
    CHECK(j["columns"].size() == 4);
}
