#include <doctest.h>

#include "verafi/chunking.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace verafi;

namespace {

SourceDocument one_page_doc(std::string text) {
    SourceDocument doc;
    doc.doc_id = "doc";
    doc.pages.push_back({1, std::move(text)});
    return doc;
}

// Random page text over an alphabet that exercises every separator tier.
std::string random_page(std::mt19937& rng, size_t length) {
    static const std::string alphabet = "abcdefgh  ..\n";
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> rare(0, 199);
    std::string text;
    while (text.size() < length) {
        if (rare(rng) == 0) {
            text += "\n\n";
        } else if (rare(rng) == 1) {
            text += ". ";
        } else {
            text.push_back(alphabet[pick(rng)]);
        }
    }
    text.resize(length);
    return text;
}

void check_coverage(const SourceDocument& doc, const std::vector<DocumentChunk>& chunks,
                    const ChunkingConfig& cfg) {
    for (const auto& page : doc.pages) {
        size_t expected_start = 0;
        size_t last_end = 0;
        bool any = false;
        for (const auto& chunk : chunks) {
            if (chunk.page_number != page.page_number) continue;
            any = true;
            CHECK(chunk.char_end > chunk.char_start);
            CHECK(chunk.char_end - chunk.char_start <= cfg.chunk_size);
            CHECK(chunk.char_end <= page.text.size());
            // No gap: each span starts at or before the previous span's end.
            CHECK(chunk.char_start <= expected_start);
            expected_start = std::max(expected_start, chunk.char_end);
            last_end = chunk.char_end;
            // The chunk text is the span minus trailing whitespace.
            std::string raw = page.text.substr(chunk.char_start, chunk.char_end - chunk.char_start);
            size_t keep = raw.find_last_not_of(" \t\n\r");
            std::string trimmed = keep == std::string::npos ? std::string{} : raw.substr(0, keep + 1);
            CHECK(chunk.text == trimmed);
        }
        if (!page.text.empty()) {
            CHECK(any);
            CHECK(last_end == page.text.size());
        }
    }
}

}  // namespace

TEST_CASE("separator-free 1200-char page falls back to stride-450 windows") {
    ChunkingConfig cfg;  // 500 / 50 defaults
    auto chunks = chunk_document(one_page_doc(std::string(1200, 'x')), cfg);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].char_start == 0);
    CHECK(chunks[0].char_end == 500);
    CHECK(chunks[1].char_start == 450);
    CHECK(chunks[1].char_end == 950);
    CHECK(chunks[2].char_start == 900);
    CHECK(chunks[2].char_end == 1200);
    CHECK(chunks[0].chunk_id == "doc:p1:c0");
    CHECK(chunks[1].chunk_id == "doc:p1:c1");
    CHECK(chunks[2].chunk_id == "doc:p1:c2");
    // Consecutive fallback windows overlap by exactly 50 characters.
    CHECK(chunks[0].char_end - chunks[1].char_start == 50);
    CHECK(chunks[1].char_end - chunks[2].char_start == 50);
}

TEST_CASE("sentence separator splits without the character fallback") {
    ChunkingConfig cfg;
    cfg.chunk_size = 3;
    cfg.overlap = 1;
    auto chunks = chunk_document(one_page_doc("A. B. C."), cfg);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].text == "A.");
    CHECK(chunks[1].text == "B.");
    CHECK(chunks[2].text == "C.");
}

TEST_CASE("paragraph separator is preferred when it suffices") {
    ChunkingConfig cfg;
    cfg.chunk_size = 20;
    cfg.overlap = 5;
    std::string para1 = "first paragraph";      // 15 chars
    std::string para2 = "second one";           // 10 chars
    auto chunks = chunk_document(one_page_doc(para1 + "\n\n" + para2), cfg);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text == para1);
    CHECK(chunks[1].text == para2);
}

TEST_CASE("chunks never cross page boundaries") {
    SourceDocument doc;
    doc.doc_id = "multi";
    doc.pages.push_back({1, std::string(600, 'a')});
    doc.pages.push_back({3, "short page"});
    ChunkingConfig cfg;
    auto chunks = chunk_document(doc, cfg);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].page_number == 1);
    CHECK(chunks[1].page_number == 1);
    CHECK(chunks[2].page_number == 3);
    CHECK(chunks[2].chunk_id == "multi:p3:c0");
    CHECK(chunks[2].text == "short page");
}

TEST_CASE("coverage property holds on randomized documents") {
    std::mt19937 rng(20240817);
    ChunkingConfig cfg;
    std::uniform_int_distribution<size_t> length(1, 4000);
    for (int i = 0; i < 60; ++i) {
        SourceDocument doc;
        doc.doc_id = "rnd";
        int pages = 1 + static_cast<int>(rng() % 3);
        for (int p = 0; p < pages; ++p) {
            doc.pages.push_back({p + 1, random_page(rng, length(rng))});
        }
        auto chunks = chunk_document(doc, cfg);
        check_coverage(doc, chunks, cfg);
    }
}

TEST_CASE("separator-free random text overlaps by exactly the configured amount") {
    std::mt19937 rng(7);
    ChunkingConfig cfg;
    for (int i = 0; i < 20; ++i) {
        size_t len = 500 + rng() % 3000;
        std::string text;
        for (size_t j = 0; j < len; ++j) {
            text.push_back(static_cast<char>('a' + rng() % 26));
        }
        auto chunks = chunk_document(one_page_doc(text), cfg);
        for (size_t c = 1; c < chunks.size(); ++c) {
            CHECK(chunks[c - 1].char_end - chunks[c].char_start == cfg.overlap);
        }
    }
}

TEST_CASE("ingest_documents validates records and names the offender") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "verafi_ingest_test";
    fs::create_directories(dir);
    fs::path good = dir / "good.jsonl";
    {
        std::ofstream out(good);
        out << R"({"doc_id": "d1", "pages": [{"page_number": 1, "text": "hello"}]})" << "\n";
        out << R"({"doc_id": "d2", "pages": [{"page_number": 2, "text": "world"}]})" << "\n";
    }
    auto docs = ingest_documents(good.string());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "d1");
    CHECK(docs[1].pages[0].page_number == 2);

    SUBCASE("duplicate doc_id") {
        fs::path bad = dir / "dup.jsonl";
        std::ofstream out(bad);
        out << R"({"doc_id": "d", "pages": [{"page_number": 1, "text": "a"}]})" << "\n";
        out << R"({"doc_id": "d", "pages": [{"page_number": 1, "text": "b"}]})" << "\n";
        out.close();
        CHECK_THROWS_WITH_AS(ingest_documents(bad.string()),
                             doctest::Contains("record 1"), std::runtime_error);
    }
    SUBCASE("non-increasing page numbers") {
        fs::path bad = dir / "pages.jsonl";
        std::ofstream out(bad);
        out << R"({"doc_id": "d", "pages": [{"page_number": 2, "text": "a"}, {"page_number": 2, "text": "b"}]})"
            << "\n";
        out.close();
        CHECK_THROWS_WITH_AS(ingest_documents(bad.string()),
                             doctest::Contains("strictly increasing"), std::runtime_error);
    }
    SUBCASE("missing doc_id") {
        fs::path bad = dir / "noid.jsonl";
        std::ofstream out(bad);
        out << R"({"pages": [{"page_number": 1, "text": "a"}]})" << "\n";
        out.close();
        CHECK_THROWS_WITH_AS(ingest_documents(bad.string()),
                             doctest::Contains("doc_id"), std::runtime_error);
    }
    SUBCASE("directory ingest reads every jsonl file") {
        fs::path dir2 = dir / "corpus";
        fs::create_directories(dir2);
        for (auto name : {"a.jsonl", "b.jsonl"}) {
            std::ofstream out(dir2 / name);
            out << R"({"doc_id": ")" << name << R"(", "pages": [{"page_number": 1, "text": "x"}]})"
                << "\n";
        }
        CHECK(ingest_documents(dir2.string()).size() == 2);
    }
    fs::remove_all(dir);
}
