#include "catp/baselines.hpp"

#include <cmath>

namespace catp {

ImportanceVector l2_importance(const EmbeddingMatrix& emb) {
    ImportanceVector scores(emb.n_tokens());
    for (std::size_t t = 0; t < emb.n_tokens(); ++t) {
        double sq = 0.0;
        for (double v : emb.row(t)) sq += v * v;
        scores[t] = std::sqrt(sq);
    }
    return scores;
}

ImportanceVector selfattn_importance(const SelfAttnTensor& sa, const LayerSelection& sel) {
    std::vector<std::size_t> layers = sel.resolve(sa.layers());
    const std::size_t n = sa.n_tokens();
    ImportanceVector scores(n, 0.0);
    for (std::size_t l : layers) {
        for (std::size_t h = 0; h < sa.heads(); ++h) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) scores[j] += sa.at(l, h, i, j);
            }
        }
    }
    return scores;
}

} // namespace catp
