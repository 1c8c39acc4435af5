#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "catp/attnio.hpp"
#include "catp/layer_selection.hpp"

namespace catp {

/// Points one (layer, head, image-token) column hands out; always a
/// permutation of {0, ..., L0-1}.
using VotePoints = std::vector<int>;

/// Per-query-token accumulated score. Integer-valued in the unweighted
/// case, real-valued under weighted voting.
using ImportanceVector = std::vector<double>;

/// Normalized per-image-token voting weights: non-negative, sum to 1.
class ImageWeights {
public:
    explicit ImageWeights(std::vector<double> weights);

    static ImageWeights uniform(std::size_t n_image);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<double>& values() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
};

/// Borda-style points for one column: the n-th largest value (n = 1 is the
/// largest) earns its token L0-n points; ties rank the lower index better.
VotePoints rank_points(std::span<const double> column);

/// Accumulated rank votes over the selected layers, every head, every image
/// token. Unweighted scores are exact integers.
ImportanceVector importance(const AttnTensor& prob, const LayerSelection& sel);

/// Weighted variant: each image token's points are scaled by its weight.
/// weights.size() must equal prob.n_image().
ImportanceVector importance(const AttnTensor& prob, const LayerSelection& sel,
                            const ImageWeights& weights);

/// Voting weights from the last self-attention layer: raw score of token j
/// is the attention it receives (column sum over heads and senders),
/// normalized to sum 1.
ImageWeights image_weights_from_self_attention(const SelfAttnTensor& sa);

} // namespace catp
