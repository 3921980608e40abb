#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace verafi {

struct SourcePage {
    int page_number = 0;
    std::string text;
};

struct SourceDocument {
    std::string doc_id;
    std::string title;
    std::vector<SourcePage> pages;
    std::string source_path;
};

struct DocumentChunk {
    std::string chunk_id;
    std::string doc_id;
    int page_number = 0;
    std::string text;
    size_t char_start = 0;  // offsets into the source page text
    size_t char_end = 0;
};

struct ChunkingConfig {
    size_t chunk_size = 500;
    size_t overlap = 50;
    std::vector<std::string> separator_hierarchy = {"\n\n", "\n", ". ", " "};
};

// Reads line-delimited JSON document records from a file, or from every
// *.jsonl file in a directory. Throws on malformed records, naming the
// file and record index.
std::vector<SourceDocument> ingest_documents(const std::string& path);

// Recursive character splitting: split each page on the first separator in
// the hierarchy that yields pieces <= chunk_size, recursing into oversized
// pieces; the final fallback is a character window of width chunk_size and
// stride chunk_size - overlap. Chunks never cross page boundaries.
std::vector<DocumentChunk> chunk_document(const SourceDocument& doc, const ChunkingConfig& cfg);

}  // namespace verafi
