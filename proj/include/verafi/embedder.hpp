#pragma once

#include <memory>
#include <string>
#include <vector>

namespace verafi {

struct EmbeddingVector {
    std::vector<double> values;

    size_t dim() const { return values.size(); }
};

// Service contract for the embedding model. Same text + same operation must
// produce the same vector for a given client instance.
class EmbedderClient {
public:
    virtual ~EmbedderClient() = default;
    virtual EmbeddingVector embed_query(const std::string& text,
                                        const std::string& instruction) = 0;
    virtual EmbeddingVector embed_passage(const std::string& text) = 0;
    virtual size_t dim() const = 0;
};

// Deterministic offline embedder: hashed bag-of-words projection into a
// fixed dimension, L2-normalized. Identical texts embed identically and
// texts sharing tokens correlate. The instruction string is ignored.
class MockEmbedder : public EmbedderClient {
public:
    explicit MockEmbedder(size_t dim = 64) : dim_(dim) {}
    EmbeddingVector embed_query(const std::string& text, const std::string& instruction) override;
    EmbeddingVector embed_passage(const std::string& text) override;
    size_t dim() const override { return dim_; }

private:
    EmbeddingVector embed(const std::string& text) const;
    size_t dim_;
};

// HTTP embedder speaking the JSON wire contract:
//   POST /embed {"text": ..., "role": "query"|"passage", "instruction": ...}
//   -> {"values": [..]}
class HttpEmbedder : public EmbedderClient {
public:
    HttpEmbedder(std::string host, int port, size_t dim)
        : host_(std::move(host)), port_(port), dim_(dim) {}
    EmbeddingVector embed_query(const std::string& text, const std::string& instruction) override;
    EmbeddingVector embed_passage(const std::string& text) override;
    size_t dim() const override { return dim_; }

private:
    EmbeddingVector request(const std::string& text, const std::string& role,
                            const std::string& instruction);
    std::string host_;
    int port_;
    size_t dim_;
};

}  // namespace verafi
