#pragma once

#include "catp/attnio.hpp"
#include "catp/layer_selection.hpp"
#include "catp/voting.hpp"

namespace catp {

/// Magnitude baseline: scores[q] = Euclidean norm of embedding row q.
ImportanceVector l2_importance(const EmbeddingMatrix& emb);

/// Self-attention baseline: scores[j] = attention token j receives, summed
/// over the selected layers, all heads, and all senders.
ImportanceVector selfattn_importance(const SelfAttnTensor& sa, const LayerSelection& sel);

} // namespace catp
