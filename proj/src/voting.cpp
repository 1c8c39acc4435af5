#include "catp/voting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace catp {

ImageWeights::ImageWeights(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) raise(ErrorCode::WeightLengthMismatch, "weights must not be empty");
    double sum = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w)) raise(ErrorCode::NonFiniteValue, "weight is not finite");
        if (w < 0.0) raise(ErrorCode::NegativeValue, "weight is negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "weights sum to " << sum << ", expected 1";
        raise(ErrorCode::ZeroMassWeights, msg.str());
    }
}

ImageWeights ImageWeights::uniform(std::size_t n_image) {
    if (n_image == 0) raise(ErrorCode::WeightLengthMismatch, "need at least one image token");
    return ImageWeights(std::vector<double>(n_image, 1.0 / static_cast<double>(n_image)));
}

VotePoints rank_points(std::span<const double> column) {
    const std::size_t n = column.size();
    if (n == 0) raise(ErrorCode::EmptyColumn, "cannot rank an empty column");
    for (double v : column) {
        if (!std::isfinite(v)) raise(ErrorCode::NonFiniteValue, "column value is not finite");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable descending sort: among equal values the lower index comes
    // first and therefore takes the better rank.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return column[a] > column[b]; });

    VotePoints points(n);
    for (std::size_t rank = 0; rank < n; ++rank)
        points[order[rank]] = static_cast<int>(n - 1 - rank);
    return points;
}

namespace {

// Shared accumulation walk: layer-major, then head, then image token.
template <typename Accumulate>
void for_each_column(const AttnTensor& prob, const std::vector<std::size_t>& layers,
                     Accumulate&& accumulate) {
    const std::size_t n_query = prob.n_query();
    const std::size_t n_image = prob.n_image();
    std::vector<double> column(n_query);
    for (std::size_t l : layers) {
        for (std::size_t h = 0; h < prob.heads(); ++h) {
            for (std::size_t j = 0; j < n_image; ++j) {
                for (std::size_t q = 0; q < n_query; ++q) column[q] = prob.at(l, h, q, j);
                accumulate(j, rank_points(column));
            }
        }
    }
}

} // namespace

ImportanceVector importance(const AttnTensor& prob, const LayerSelection& sel) {
    std::vector<std::size_t> layers = sel.resolve(prob.layers());
    // Integer accumulation keeps the unweighted path exact and order-free.
    std::vector<std::int64_t> acc(prob.n_query(), 0);
    for_each_column(prob, layers, [&](std::size_t, const VotePoints& points) {
        for (std::size_t q = 0; q < points.size(); ++q) acc[q] += points[q];
    });
    ImportanceVector scores(acc.begin(), acc.end());
    return scores;
}

ImportanceVector importance(const AttnTensor& prob, const LayerSelection& sel,
                            const ImageWeights& weights) {
    if (weights.size() != prob.n_image()) {
        std::ostringstream msg;
        msg << "got " << weights.size() << " weights for " << prob.n_image() << " image tokens";
        raise(ErrorCode::WeightLengthMismatch, msg.str());
    }
    std::vector<std::size_t> layers = sel.resolve(prob.layers());
    ImportanceVector scores(prob.n_query(), 0.0);
    for_each_column(prob, layers, [&](std::size_t j, const VotePoints& points) {
        for (std::size_t q = 0; q < points.size(); ++q)
            scores[q] += weights[j] * static_cast<double>(points[q]);
    });
    return scores;
}

ImageWeights image_weights_from_self_attention(const SelfAttnTensor& sa) {
    const std::size_t n = sa.n_tokens();
    const std::size_t last = sa.layers() - 1;
    std::vector<double> raw(n, 0.0);
    for (std::size_t h = 0; h < sa.heads(); ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) raw[j] += sa.at(last, h, i, j);
        }
    }
    double total = 0.0;
    for (double r : raw) {
        if (r < 0.0) raise(ErrorCode::NegativeValue, "self-attention score is negative");
        total += r;
    }
    if (total <= 0.0)
        raise(ErrorCode::ZeroMassWeights, "all self-attention scores are zero");
    for (double& r : raw) r /= total;
    return ImageWeights(std::move(raw));
}

} // namespace catp
