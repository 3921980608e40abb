#include "verafi/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace verafi;

namespace {

IndexSnapshot build_index(const PipelineConfig& config, ClientBundle& clients,
                          size_t* doc_count_out) {
    auto docs = ingest_documents(config.paths.corpus);
    if (docs.empty()) throw std::runtime_error("no documents in corpus: " + config.paths.corpus);
    std::vector<DocumentChunk> chunks;
    for (const auto& doc : docs) {
        auto doc_chunks = chunk_document(doc, config.chunking);
        chunks.insert(chunks.end(), doc_chunks.begin(), doc_chunks.end());
    }
    if (chunks.empty()) throw std::runtime_error("corpus produced no chunks");
    IndexSnapshot snapshot;
    snapshot.chunks = std::move(chunks);
    snapshot.dense = build_dense_index(snapshot.chunks, *clients.embedder);
    snapshot.bm25_k1 = config.retrieval.bm25_k1;
    snapshot.bm25_b = config.retrieval.bm25_b;
    if (doc_count_out) *doc_count_out = docs.size();
    return snapshot;
}

int cmd_ingest(const PipelineConfig& config) {
    auto clients = make_clients(config);
    size_t doc_count = 0;
    auto snapshot = build_index(config, clients, &doc_count);
    save_snapshot(snapshot, config.paths.snapshot);
    std::cout << "ingested " << doc_count << " documents, " << snapshot.chunks.size()
              << " chunks -> " << config.paths.snapshot << "\n";
    return 0;
}

int cmd_ask(const PipelineConfig& config, const std::string& question, bool verbose) {
    auto clients = make_clients(config);
    Pipeline pipeline(config, load_snapshot(config.paths.snapshot), clients);
    auto result = pipeline.ask(question);
    if (verbose) {
        for (const auto& event : result.trace) {
            std::cerr << "[stage] " << event.stage
                      << (event.detail.empty() ? "" : " " + event.detail) << "\n";
        }
        for (const auto& r : result.retrieved) {
            const auto& chunk = *std::find_if(
                pipeline.snapshot().chunks.begin(), pipeline.snapshot().chunks.end(),
                [&](const DocumentChunk& c) { return c.chunk_id == r.chunk_id; });
            std::cerr << "[retrieved] rank " << r.rank << " " << r.chunk_id << " ("
                      << chunk.doc_id << ", page " << chunk.page_number
                      << ") score=" << r.cross_score << "\n";
        }
        std::cerr << "[transcript] " << result.transcript.to_json().dump(2) << "\n";
    }
    std::cout << result.answer.text << "\n";
    return 0;
}

int cmd_eval(const PipelineConfig& config, const std::string& mode,
             const std::vector<std::string>& methods, const std::string& out_override) {
    auto clients = make_clients(config);
    Pipeline pipeline(config, load_snapshot(config.paths.snapshot), clients);
    auto dataset = load_dataset(config.paths.dataset);
    EvaluationReport report;
    if (mode == "retrieval") {
        report = pipeline.run_retrieval_comparison(
            dataset, methods.empty() ? Pipeline::default_retrieval_methods() : methods);
    } else {
        report = pipeline.run_generation_comparison(
            dataset, methods.empty() ? Pipeline::default_generation_configurations() : methods);
    }
    std::string base = out_override.empty() ? config.paths.report : out_override;
    auto parent = std::filesystem::path(base).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream table(base + ".txt");
    table << report.to_table();
    std::ofstream machine(base + ".json");
    machine << report.to_json().dump(2) << "\n";
    std::cout << report.to_table();
    for (const auto& error : report.errors) std::cerr << "[error] " << error << "\n";
    return 0;
}

int cmd_policy_validate(const PipelineConfig& config) {
    auto policies = load_policies(config.policy.path, /*strict=*/false);
    auto diagnostics = lint_policy_set(policies);
    bool hard_failure = false;
    for (const auto& d : diagnostics) {
        std::cerr << d << "\n";
        if (d.find("does not parse") != std::string::npos ||
            d.find("duplicate rule id") != std::string::npos) {
            hard_failure = true;
        }
    }
    if (hard_failure) return 2;
    std::cout << policies.rules.size() << " rules OK\n";
    return 0;
}

int cmd_policy_render(const PipelineConfig& config, size_t max_rules) {
    auto policies = load_policies(config.policy.path);
    std::cout << format_policy_context(policies, max_rules ? max_rules : config.policy.max_rules)
              << "\n";
    return 0;
}

int cmd_policy_eval(const PipelineConfig& config, const std::string& bindings_path) {
    auto policies = load_policies(config.policy.path);
    std::ifstream in(bindings_path);
    if (!in) throw std::runtime_error("cannot open bindings file: " + bindings_path);
    json doc = json::parse(in);
    Environment env;
    for (const auto& [name, value] : doc.items()) {
        if (value.is_boolean()) {
            env[name] = value.get<bool>();
        } else if (value.is_number()) {
            auto parsed = parse_number_literal(value.dump());
            if (!parsed) throw std::runtime_error("binding " + name + " is not a plain decimal");
            env[name] = *parsed;
        } else if (value.is_string()) {
            std::string s = value.get<std::string>();
            if (auto parsed = parse_number_literal(s)) {
                env[name] = *parsed;
            } else {
                env[name] = s;  // enum symbol
            }
        } else {
            throw std::runtime_error("binding " + name + " has unsupported type");
        }
    }
    for (const auto& rule : policies.rules) {
        auto verdict = evaluate_rule(rule, env, config.policy.epsilon);
        std::cout << rule.id << ": ";
        switch (verdict.status) {
            case RuleStatus::Satisfied: std::cout << "Satisfied"; break;
            case RuleStatus::Violated: std::cout << "Violated"; break;
            case RuleStatus::Indeterminate: std::cout << "Indeterminate, missing ["; {
                for (size_t i = 0; i < verdict.missing_symbols.size(); ++i) {
                    if (i) std::cout << ", ";
                    std::cout << verdict.missing_symbols[i];
                }
                std::cout << "]";
            } break;
        }
        if (!verdict.diagnostic.empty()) std::cout << " (" << verdict.diagnostic << ")";
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VERAFI financial question-answering pipeline"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "pipeline config file")->required();

    auto* ingest = app.add_subcommand("ingest", "build and persist the index snapshot");

    auto* ask = app.add_subcommand("ask", "answer one question through the full pipeline");
    std::string question;
    bool verbose = false;
    std::string template_override;
    ask->add_option("--question", question, "the financial question")->required();
    ask->add_flag("--verbose", verbose, "print retrieval provenance and the agent transcript");
    ask->add_option("--template", template_override,
                    "prompt template: rag-only | baseline | neurosymbolic");

    auto* eval = app.add_subcommand("eval", "run the comparison protocol over the dataset");
    std::string mode;
    std::string methods_csv;
    std::string out_override;
    eval->add_option("--mode", mode, "retrieval | generation")->required();
    eval->add_option("--methods", methods_csv, "comma-separated method subset");
    eval->add_option("--out", out_override, "report output base path");

    auto* policy = app.add_subcommand("policy", "policy file utilities");
    policy->require_subcommand(1);
    auto* validate = policy->add_subcommand("validate", "lint the policy file");
    auto* render = policy->add_subcommand("render", "print the in-context policy block");
    size_t max_rules = 0;
    render->add_option("--max-rules", max_rules, "rules to include before truncation");
    auto* peval = policy->add_subcommand("eval", "evaluate rules against a bindings file");
    std::string bindings_path;
    peval->add_option("--bindings", bindings_path, "JSON file of symbol bindings")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        PipelineConfig config = load_config(config_path);
        if (ingest->parsed()) return cmd_ingest(config);
        if (ask->parsed()) {
            if (question.empty()) {
                std::cerr << "usage error: --question must be non-empty\n";
                return 1;
            }
            if (!template_override.empty()) config.agent.template_kind = template_override;
            return cmd_ask(config, question, verbose);
        }
        if (eval->parsed()) {
            if (mode != "retrieval" && mode != "generation") {
                std::cerr << "usage error: --mode must be retrieval or generation\n";
                return 1;
            }
            std::vector<std::string> methods;
            std::stringstream ss(methods_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) methods.push_back(item);
            }
            return cmd_eval(config, mode, methods, out_override);
        }
        if (policy->parsed()) {
            if (validate->parsed()) return cmd_policy_validate(config);
            if (render->parsed()) return cmd_policy_render(config, max_rules);
            if (peval->parsed()) return cmd_policy_eval(config, bindings_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
