#include "verafi/snapshot.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

namespace {
constexpr int kSnapshotVersion = 1;
}

void save_snapshot(const IndexSnapshot& snapshot, const std::string& path) {
    json doc;
    doc["version"] = kSnapshotVersion;
    doc["bm25_k1"] = snapshot.bm25_k1;
    doc["bm25_b"] = snapshot.bm25_b;
    doc["dim"] = snapshot.dense.dim;
    json chunks = json::array();
    for (const auto& c : snapshot.chunks) {
        chunks.push_back({{"chunk_id", c.chunk_id},
                          {"doc_id", c.doc_id},
                          {"page_number", c.page_number},
                          {"text", c.text},
                          {"char_start", c.char_start},
                          {"char_end", c.char_end}});
    }
    doc["chunks"] = std::move(chunks);
    json dense = json::object();
    for (const auto& [id, vec] : snapshot.dense.entries) {
        dense[id] = vec.values;
    }
    doc["dense"] = std::move(dense);

    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out << doc.dump(2) << "\n";
}

IndexSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    json doc = json::parse(in);
    if (doc.value("version", 0) != kSnapshotVersion) {
        throw std::runtime_error("unsupported snapshot version in " + path);
    }
    IndexSnapshot snapshot;
    snapshot.bm25_k1 = doc.value("bm25_k1", 1.2);
    snapshot.bm25_b = doc.value("bm25_b", 0.75);
    snapshot.dense.dim = doc.at("dim").get<size_t>();
    for (const auto& c : doc.at("chunks")) {
        DocumentChunk chunk;
        chunk.chunk_id = c.at("chunk_id").get<std::string>();
        chunk.doc_id = c.at("doc_id").get<std::string>();
        chunk.page_number = c.at("page_number").get<int>();
        chunk.text = c.at("text").get<std::string>();
        chunk.char_start = c.at("char_start").get<size_t>();
        chunk.char_end = c.at("char_end").get<size_t>();
        snapshot.chunks.push_back(std::move(chunk));
    }
    for (const auto& [id, values] : doc.at("dense").items()) {
        EmbeddingVector vec;
        vec.values = values.get<std::vector<double>>();
        snapshot.dense.entries.emplace_back(id, std::move(vec));
    }
    // nlohmann objects iterate in sorted key order, matching the index order.
    return snapshot;
}

}  // namespace verafi
