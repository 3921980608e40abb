#include "verafi/embedder.hpp"

#include "verafi/tokenize.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>

using nlohmann::json;

namespace verafi {

EmbeddingVector MockEmbedder::embed(const std::string& text) const {
    EmbeddingVector vec;
    vec.values.assign(dim_, 0.0);
    for (const auto& token : tokenize(text)) {
        // FNV-1a; std::hash is not specified to be stable across platforms.
        uint64_t h = 1469598103934665603ull;
        for (char c : token) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        size_t bucket = h % dim_;
        double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
        vec.values[bucket] += sign;
    }
    double norm = 0.0;
    for (double v : vec.values) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& v : vec.values) v /= norm;
    } else {
        vec.values[0] = 1.0;  // empty or fully-cancelled text still embeds somewhere
    }
    return vec;
}

EmbeddingVector MockEmbedder::embed_query(const std::string& text, const std::string&) {
    return embed(text);
}

EmbeddingVector MockEmbedder::embed_passage(const std::string& text) {
    return embed(text);
}

EmbeddingVector HttpEmbedder::request(const std::string& text, const std::string& role,
                                      const std::string& instruction) {
    httplib::Client client(host_, port_);
    json body = {{"text", text}, {"role", role}};
    if (!instruction.empty()) body["instruction"] = instruction;
    auto res = client.Post("/embed", body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw std::runtime_error("embedder service request failed (role=" + role + ")");
    }
    json reply = json::parse(res->body);
    EmbeddingVector vec;
    vec.values = reply.at("values").get<std::vector<double>>();
    if (vec.dim() != dim_) {
        throw std::runtime_error("embedder returned wrong dimension");
    }
    return vec;
}

EmbeddingVector HttpEmbedder::embed_query(const std::string& text, const std::string& instruction) {
    return request(text, "query", instruction);
}

EmbeddingVector HttpEmbedder::embed_passage(const std::string& text) {
    return request(text, "passage", "");
}

}  // namespace verafi
