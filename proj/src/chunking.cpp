#include "verafi/chunking.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace verafi {

namespace {

SourceDocument parse_document_record(const json& record) {
    SourceDocument doc;
    if (!record.is_object()) throw std::runtime_error("record is not an object");
    if (!record.contains("doc_id") || !record["doc_id"].is_string() ||
        record["doc_id"].get<std::string>().empty()) {
        throw std::runtime_error("missing or empty doc_id");
    }
    doc.doc_id = record["doc_id"].get<std::string>();
    doc.title = record.value("title", std::string{});
    doc.source_path = record.value("source_path", std::string{});
    if (!record.contains("pages") || !record["pages"].is_array()) {
        throw std::runtime_error("missing pages array");
    }
    int last_page = 0;
    for (const auto& page : record["pages"]) {
        SourcePage p;
        p.page_number = page.at("page_number").get<int>();
        p.text = page.at("text").get<std::string>();
        if (p.page_number <= last_page) {
            throw std::runtime_error("page numbers must be positive and strictly increasing");
        }
        last_page = p.page_number;
        doc.pages.push_back(std::move(p));
    }
    return doc;
}

void ingest_file(const fs::path& file, std::vector<SourceDocument>& docs,
                 std::set<std::string>& seen_ids) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open corpus file: " + file.string());
    std::string line;
    size_t record_index = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            SourceDocument doc = parse_document_record(json::parse(line));
            if (!seen_ids.insert(doc.doc_id).second) {
                throw std::runtime_error("duplicate doc_id: " + doc.doc_id);
            }
            docs.push_back(std::move(doc));
        } catch (const std::exception& e) {
            throw std::runtime_error("malformed record " + std::to_string(record_index) +
                                     " in " + file.string() + ": " + e.what());
        }
        ++record_index;
    }
}

}  // namespace

std::vector<SourceDocument> ingest_documents(const std::string& path) {
    fs::path p(path);
    if (!fs::exists(p)) throw std::runtime_error("corpus path does not exist: " + path);
    std::vector<SourceDocument> docs;
    std::set<std::string> seen_ids;
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(p)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) ingest_file(file, docs, seen_ids);
    } else {
        ingest_file(p, docs, seen_ids);
    }
    return docs;
}

namespace {

struct Span {
    size_t start;
    size_t end;
};

// Splits [start,end) of `text` at each occurrence of `sep`, keeping the
// separator attached to the preceding piece so the pieces partition the span.
std::vector<Span> split_on_separator(const std::string& text, Span span, const std::string& sep) {
    std::vector<Span> pieces;
    size_t pos = span.start;
    while (pos < span.end) {
        size_t hit = text.find(sep, pos);
        if (hit == std::string::npos || hit + sep.size() > span.end) {
            pieces.push_back({pos, span.end});
            break;
        }
        pieces.push_back({pos, hit + sep.size()});
        pos = hit + sep.size();
    }
    return pieces;
}

void split_recursive(const std::string& text, Span span, const ChunkingConfig& cfg,
                     size_t sep_index, std::vector<Span>& out) {
    if (span.end - span.start <= cfg.chunk_size) {
        if (span.end > span.start) out.push_back(span);
        return;
    }
    if (sep_index >= cfg.separator_hierarchy.size()) {
        // Character-window fallback with stride chunk_size - overlap.
        size_t stride = cfg.chunk_size - cfg.overlap;
        size_t start = span.start;
        while (true) {
            size_t end = std::min(start + cfg.chunk_size, span.end);
            out.push_back({start, end});
            if (end == span.end) break;
            start += stride;
        }
        return;
    }
    auto pieces = split_on_separator(text, span, cfg.separator_hierarchy[sep_index]);
    if (pieces.size() == 1) {
        split_recursive(text, span, cfg, sep_index + 1, out);
        return;
    }
    for (const auto& piece : pieces) {
        if (piece.end - piece.start <= cfg.chunk_size) {
            out.push_back(piece);
        } else {
            split_recursive(text, piece, cfg, sep_index + 1, out);
        }
    }
}

}  // namespace

std::vector<DocumentChunk> chunk_document(const SourceDocument& doc, const ChunkingConfig& cfg) {
    if (cfg.chunk_size == 0 || cfg.overlap >= cfg.chunk_size) {
        throw std::invalid_argument("chunking config requires 0 <= overlap < chunk_size");
    }
    std::vector<DocumentChunk> chunks;
    for (const auto& page : doc.pages) {
        if (page.text.empty()) continue;
        std::vector<Span> spans;
        split_recursive(page.text, {0, page.text.size()}, cfg, 0, spans);
        size_t index = 0;
        for (const auto& span : spans) {
            DocumentChunk chunk;
            chunk.chunk_id = doc.doc_id + ":p" + std::to_string(page.page_number) + ":c" +
                             std::to_string(index++);
            chunk.doc_id = doc.doc_id;
            chunk.page_number = page.page_number;
            chunk.char_start = span.start;
            chunk.char_end = span.end;
            chunk.text = page.text.substr(span.start, span.end - span.start);
            // Separator splits keep the separator inside the span so spans
            // partition the page; the chunk text drops that trailing
            // whitespace. char_start/char_end stay authoritative for coverage.
            size_t keep = chunk.text.find_last_not_of(" \t\n\r");
            chunk.text.erase(keep == std::string::npos ? 0 : keep + 1);
            chunks.push_back(std::move(chunk));
        }
    }
    return chunks;
}

}  // namespace verafi
