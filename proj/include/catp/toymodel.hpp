#pragma once

#include <cstdint>
#include <tuple>

#include "catp/attnio.hpp"

namespace catp {

// splitmix64 (the standard 0x9E3779B97F4A7C15 / Stafford-mix13 constants).
// Chosen because it is a few lines in any language, so fixtures generated
// here can be reproduced bit-exactly elsewhere.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0, 1]: (next() >> 11 + 1) * 2^-53.
    double uniform();

    /// Standard normal via Box-Muller; consumes exactly two uniforms per
    /// call and returns only the cosine branch.
    double normal();
};

/// Deterministic substream seed for a (stream, layer, head) block: one
/// splitmix64 finalizer pass per component, each offset by the golden gamma.
std::uint64_t substream_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t layer = 0,
                             std::uint64_t head = 0);

struct ToyConfig {
    std::uint64_t seed = 0;
    std::size_t layers = 1;
    std::size_t heads = 1;
    std::size_t n_query = 1;
    std::size_t n_image = 1;
    std::size_t dim = 1;
    double temperature = 1.0;
};

struct ToyFixture {
    AttnTensor cross;    // layers x heads x n_query x n_image
    SelfAttnTensor self; // layers x heads x n_image x n_image
    EmbeddingMatrix emb; // n_query x dim (the query-token embeddings)
};

/// Synthesizes one sample's worth of attention data from scaled dot
/// products of Gaussian embeddings, softmaxed per row. Pure function of
/// cfg; all math in double.
ToyFixture generate(const ToyConfig& cfg);

} // namespace catp
