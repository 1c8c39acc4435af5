#pragma once

#include <cstddef>
#include <vector>

#include "catp/voting.hpp"

namespace catp {

/// Outcome of one prune step. kept and pruned are ascending and together
/// partition {0, ..., L0-1}.
struct PruneDecision {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> pruned;
    std::size_t keep_count = 0;
    double ratio = 0.0;

    bool operator==(const PruneDecision&) const = default;
};

/// Tokens surviving a prune at ratio p: L0 - floor(L0 * p).
/// Products within 1e-9 below an integer count as that integer, so ratios
/// like 1/3 on 3 tokens behave as the exact fraction would.
std::size_t keep_count(std::size_t n_query, double p);

/// Keeps the k highest-importance tokens; exact ties keep the lower index.
PruneDecision select_tokens(const ImportanceVector& imp, std::size_t k);

/// keep_count + select_tokens in one step; records p in the decision.
PruneDecision prune(const ImportanceVector& imp, double p);

} // namespace catp
