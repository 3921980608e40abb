#pragma once

#include "verafi/chunking.hpp"
#include "verafi/retrieval.hpp"

#include <string>
#include <vector>

namespace verafi {

// On-disk index snapshot: chunks plus dense vectors, versioned JSON with
// sorted keys so identical inputs produce byte-identical files. The BM25
// index is rebuilt deterministically from the chunks on load.
struct IndexSnapshot {
    std::vector<DocumentChunk> chunks;
    DenseIndex dense;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;

    Bm25Index build_bm25() const { return build_bm25_index(chunks, bm25_k1, bm25_b); }
};

void save_snapshot(const IndexSnapshot& snapshot, const std::string& path);
IndexSnapshot load_snapshot(const std::string& path);

}  // namespace verafi
