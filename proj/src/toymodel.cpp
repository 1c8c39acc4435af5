#include "catp/toymodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace catp {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 output finalizer, used standalone as a 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream ids for substream derivation.
constexpr std::uint64_t kStreamQueryEmb = 1;
constexpr std::uint64_t kStreamImageEmb = 2;
constexpr std::uint64_t kStreamCrossBlock = 3;
constexpr std::uint64_t kStreamSelfBlock = 4;

std::vector<double> draw_normals(SplitMix64& rng, std::size_t count) {
    std::vector<double> out(count);
    for (double& v : out) v = rng.normal();
    return out;
}

// rows x cols times cols x cols, both row-major.
std::vector<double> project(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                            const std::vector<double>& proj) {
    std::vector<double> out(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < cols; ++k) {
            double v = m[r * cols + k];
            for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += v * proj[k * cols + c];
        }
    }
    return out;
}

// Scaled dot-product rows softmaxed in place: out[i][j] over the j axis.
void attention_rows(const std::vector<double>& a, std::size_t n_a, const std::vector<double>& b,
                    std::size_t n_b, std::size_t dim, double scale, std::vector<double>& out) {
    std::vector<double> logits(n_b);
    for (std::size_t i = 0; i < n_a; ++i) {
        double max_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_b; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += a[i * dim + k] * b[j * dim + k];
            logits[j] = dot * scale;
            max_logit = std::max(max_logit, logits[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n_b; ++j) {
            logits[j] = std::exp(logits[j] - max_logit);
            sum += logits[j];
        }
        for (std::size_t j = 0; j < n_b; ++j) out.push_back(logits[j] / sum);
    }
}

void check_config(const ToyConfig& cfg) {
    if (cfg.layers == 0 || cfg.heads == 0 || cfg.n_query == 0 || cfg.n_image == 0 || cfg.dim == 0)
        raise(ErrorCode::InvalidDimensions, "all toy-model counts must be >= 1");
    if (!(cfg.temperature > 0.0))
        raise(ErrorCode::RatioOutOfRange, "temperature must be > 0");
}

} // namespace

double SplitMix64::uniform() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double SplitMix64::normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t substream_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t layer,
                             std::uint64_t head) {
    std::uint64_t s = mix64(root + kGamma * stream);
    s = mix64(s + kGamma * layer);
    return mix64(s + kGamma * head);
}

ToyFixture generate(const ToyConfig& cfg) {
    check_config(cfg);
    const std::size_t dim = cfg.dim;
    const double scale = 1.0 / (std::sqrt(static_cast<double>(dim)) * cfg.temperature);

    SplitMix64 query_rng{substream_seed(cfg.seed, kStreamQueryEmb)};
    std::vector<double> query_emb = draw_normals(query_rng, cfg.n_query * dim);
    SplitMix64 image_rng{substream_seed(cfg.seed, kStreamImageEmb)};
    std::vector<double> image_emb = draw_normals(image_rng, cfg.n_image * dim);

    std::vector<double> cross;
    cross.reserve(cfg.layers * cfg.heads * cfg.n_query * cfg.n_image);
    std::vector<double> self;
    self.reserve(cfg.layers * cfg.heads * cfg.n_image * cfg.n_image);

    for (std::size_t l = 0; l < cfg.layers; ++l) {
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            // Per-block projections make heads and layers distinct draws
            // of the same underlying embeddings.
            SplitMix64 rng{substream_seed(cfg.seed, kStreamCrossBlock, l, h)};
            std::vector<double> pq = project(query_emb, cfg.n_query, dim, draw_normals(rng, dim * dim));
            std::vector<double> pv = project(image_emb, cfg.n_image, dim, draw_normals(rng, dim * dim));
            attention_rows(pq, cfg.n_query, pv, cfg.n_image, dim, scale, cross);

            SplitMix64 self_rng{substream_seed(cfg.seed, kStreamSelfBlock, l, h)};
            std::vector<double> ps =
                project(image_emb, cfg.n_image, dim, draw_normals(self_rng, dim * dim));
            std::vector<double> pr =
                project(image_emb, cfg.n_image, dim, draw_normals(self_rng, dim * dim));
            attention_rows(ps, cfg.n_image, pr, cfg.n_image, dim, scale, self);
        }
    }

    return ToyFixture{
        AttnTensor(cfg.layers, cfg.heads, cfg.n_query, cfg.n_image, std::move(cross)),
        SelfAttnTensor(cfg.layers, cfg.heads, cfg.n_image, std::move(self)),
        EmbeddingMatrix(cfg.n_query, dim, std::move(query_emb)),
    };
}

} // namespace catp
