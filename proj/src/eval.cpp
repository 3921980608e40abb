#include "verafi/eval.hpp"

#include "verafi/tokenize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

std::vector<QueryRecord> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::vector<QueryRecord> records;
    std::set<std::string> seen;
    std::string line;
    size_t index = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json record = json::parse(line);
            QueryRecord q;
            q.query_id = record.at("query_id").get<std::string>();
            q.question = record.at("question").get<std::string>();
            for (const auto& id : record.at("gold_evidence")) {
                q.gold_evidence.insert(id.get<std::string>());
            }
            q.gold_answer = record.value("gold_answer", std::string{});
            if (!seen.insert(q.query_id).second) {
                throw std::runtime_error("duplicate query_id " + q.query_id);
            }
            records.push_back(std::move(q));
        } catch (const std::exception& e) {
            throw std::runtime_error("malformed dataset record " + std::to_string(index) + " in " +
                                     path + ": " + e.what());
        }
        ++index;
    }
    return records;
}

namespace {

std::string doc_of_chunk(const std::string& chunk_id) {
    size_t pos = chunk_id.rfind(":p");
    return pos == std::string::npos ? chunk_id : chunk_id.substr(0, pos);
}

bool relevant(const std::string& chunk_id, const std::set<std::string>& gold,
              GoldGranularity granularity) {
    if (granularity == GoldGranularity::Chunk) return gold.count(chunk_id) > 0;
    return gold.count(doc_of_chunk(chunk_id)) > 0;
}

}  // namespace

RetrievalMetrics compute_retrieval_metrics(const std::vector<std::string>& ranked,
                                           const std::set<std::string>& gold, size_t k,
                                           GoldGranularity granularity) {
    if (gold.empty()) throw std::invalid_argument("compute_retrieval_metrics: empty gold set");
    RetrievalMetrics m;
    m.k = k;
    size_t top = std::min(k, ranked.size());
    size_t hits = 0;
    double dcg = 0.0;
    size_t first_relevant = 0;
    // In document granularity several chunks can share one gold document;
    // recall counts distinct gold items found.
    std::set<std::string> found;
    for (size_t i = 0; i < top; ++i) {
        if (!relevant(ranked[i], gold, granularity)) continue;
        ++hits;
        dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        if (first_relevant == 0) first_relevant = i + 1;
        found.insert(granularity == GoldGranularity::Chunk ? ranked[i] : doc_of_chunk(ranked[i]));
    }
    double idcg = 0.0;
    size_t ideal = std::min(gold.size(), k);
    for (size_t i = 0; i < ideal; ++i) {
        idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    m.recall_at_k = static_cast<double>(found.size()) / static_cast<double>(gold.size());
    m.hit_at_k = hits > 0 ? 1.0 : 0.0;
    m.mrr_at_k = first_relevant > 0 ? 1.0 / static_cast<double>(first_relevant) : 0.0;
    m.ndcg_at_k = idcg > 0.0 ? dcg / idcg : 0.0;
    return m;
}

// --- judge -----------------------------------------------------------------

std::string render_judge_prompt(const std::string& question, const std::string& answer,
                                const std::vector<std::string>& evidence_texts,
                                const std::string& gold_answer) {
    std::string evidence;
    for (size_t i = 0; i < evidence_texts.size(); ++i) {
        evidence += "[" + std::to_string(i + 1) + "] " + evidence_texts[i] + "\n";
    }
    return "You are grading the answer of a financial question-answering system.\n"
           "\n"
           "Question: " + question + "\n"
           "\n"
           "Reference answer: " + gold_answer + "\n"
           "\n"
           "Supporting evidence:\n" + evidence +
           "\n"
           "Candidate answer:\n" + answer + "\n"
           "\n"
           "Judge two binary criteria:\n"
           "- factual: 1 if every factual claim in the candidate answer is consistent with the "
           "reference answer and evidence, else 0\n"
           "- complete: 1 if the candidate answer fully addresses the question, else 0\n"
           "\n"
           "Reply with exactly this block:\n"
           "VERDICT:\n"
           "factual: <0 or 1>\n"
           "complete: <0 or 1>\n"
           "rationale: <one sentence>";
}

namespace {

std::optional<JudgeVerdict> parse_verdict(const std::string& reply) {
    static const std::regex verdict_re(
        R"(VERDICT:\s*\nfactual:\s*([01])\s*\ncomplete:\s*([01])\s*\nrationale:\s*([^\n]*))");
    std::smatch m;
    if (!std::regex_search(reply, m, verdict_re)) return std::nullopt;
    JudgeVerdict v;
    v.factual_correctness = m[1].str() == "1" ? 1 : 0;
    v.completeness = m[2].str() == "1" ? 1 : 0;
    v.rationale = m[3].str();
    return v;
}

}  // namespace

JudgeVerdict judge_generation(const std::string& question, const std::string& answer,
                              const std::vector<std::string>& evidence_texts,
                              const std::string& gold_answer, LlmClient& judge) {
    std::string prompt = render_judge_prompt(question, answer, evidence_texts, gold_answer);
    std::string last_reply;
    for (int attempt = 0; attempt < 3; ++attempt) {
        ModelTurn turn = judge.chat({{"user", prompt}}, {});
        last_reply = turn.text;
        if (auto verdict = parse_verdict(turn.text)) return *verdict;
    }
    throw std::runtime_error("judge reply had no parseable verdict block after 3 attempts: " +
                             last_reply.substr(0, 120));
}

ModelTurn MockJudgeClient::chat(const std::vector<ChatMessage>& messages,
                                const std::vector<ToolSpec>&) {
    const std::string& prompt = messages.back().content;
    auto section = [&](const std::string& header, const std::string& stop) {
        size_t start = prompt.find(header);
        if (start == std::string::npos) return std::string{};
        start += header.size();
        size_t end = prompt.find(stop, start);
        return prompt.substr(start, end == std::string::npos ? std::string::npos : end - start);
    };
    std::string gold = section("Reference answer: ", "\n\nSupporting evidence:");
    std::string answer = section("Candidate answer:\n", "\n\nJudge two binary criteria:");
    auto gold_tokens = tokenize(gold);
    auto answer_tokens = tokenize(answer);
    std::set<std::string> answer_set(answer_tokens.begin(), answer_tokens.end());
    size_t matched = 0;
    for (const auto& t : gold_tokens) matched += answer_set.count(t);
    bool factual = !gold_tokens.empty() && matched == gold_tokens.size();
    bool complete = !gold_tokens.empty() &&
                    matched * 2 >= gold_tokens.size();  // at least half the reference covered
    ModelTurn turn;
    turn.text = std::string("VERDICT:\nfactual: ") + (factual ? "1" : "0") +
                "\ncomplete: " + (complete ? "1" : "0") +
                "\nrationale: token containment of the reference answer";
    return turn;
}

// --- report ----------------------------------------------------------------

std::string EvaluationReport::to_table() const {
    std::ostringstream out;
    out << "method";
    for (const auto& c : columns) out << "\t" << c;
    out << "\n";
    out.setf(std::ios::fixed);
    out.precision(3);
    for (const auto& row : rows) {
        out << row.method;
        for (const auto& c : columns) {
            out << "\t" << row.metrics.at(c);
        }
        if (row.queries_failed > 0) {
            out << "\t(" << row.queries_failed << " queries excluded)";
        }
        out << "\n";
    }
    return out.str();
}

json EvaluationReport::to_json() const {
    json out;
    out["columns"] = columns;
    out["gold_granularity"] = gold_granularity;
    out["rows"] = json::array();
    for (const auto& row : rows) {
        json r;
        r["method"] = row.method;
        for (const auto& c : columns) r[c] = row.metrics.at(c);
        r["queries_scored"] = row.queries_scored;
        r["queries_excluded"] = row.queries_failed;
        out["rows"].push_back(std::move(r));
    }
    out["errors"] = errors;
    return out;
}

}  // namespace verafi
