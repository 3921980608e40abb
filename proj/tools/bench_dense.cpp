// Compares the OpenMP dense-scoring kernel against the serial reference on a
// synthetic index and checks that both agree.
#include "verafi/retrieval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

using namespace verafi;

namespace {

DenseIndex make_index(size_t n, size_t dim, std::mt19937& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    DenseIndex index;
    index.dim = dim;
    for (size_t i = 0; i < n; ++i) {
        EmbeddingVector vec;
        vec.values.resize(dim);
        for (auto& v : vec.values) v = dist(rng);
        char id[32];
        std::snprintf(id, sizeof(id), "chunk%08zu", i);
        index.entries.emplace_back(id, std::move(vec));
    }
    return index;
}

template <typename F>
double time_ms(F&& f, int repeats) {
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) f();
    auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    size_t n = argc > 1 ? static_cast<size_t>(std::atol(argv[1])) : 200000;
    size_t dim = argc > 2 ? static_cast<size_t>(std::atol(argv[2])) : 256;
    int repeats = argc > 3 ? std::atoi(argv[3]) : 5;

    std::mt19937 rng(7);
    auto index = make_index(n, dim, rng);
    EmbeddingVector query;
    query.values.resize(dim);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& v : query.values) v = dist(rng);

    auto serial = dense_score_all_serial(index, query);
    auto parallel = dense_score_all(index, query);
    double max_diff = 0.0;
    for (size_t i = 0; i < serial.size(); ++i) {
        max_diff = std::max(max_diff, std::fabs(serial[i] - parallel[i]));
    }

    double t_serial = time_ms([&] { dense_score_all_serial(index, query); }, repeats);
    double t_parallel = time_ms([&] { dense_score_all(index, query); }, repeats);

    std::printf("entries=%zu dim=%zu repeats=%d\n", n, dim, repeats);
    std::printf("serial:   %8.2f ms\n", t_serial);
    std::printf("parallel: %8.2f ms  (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);
    std::printf("max |serial - parallel| = %.3e\n", max_diff);
    return max_diff < 1e-12 ? 0 : 1;
}
