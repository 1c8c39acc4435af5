#include "catp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "catp/error.hpp"

namespace catp {

std::size_t keep_count(std::size_t n_query, double p) {
    if (n_query == 0) raise(ErrorCode::KOutOfRange, "need at least one query token");
    if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << "prune ratio " << p << " outside [0, 1]";
        raise(ErrorCode::RatioOutOfRange, msg.str());
    }
    // Snap products sitting just under an integer (3 * (1/3) rounds to
    // 0.999...) before flooring the pruned count.
    double product = static_cast<double>(n_query) * p;
    auto pruned = static_cast<std::size_t>(std::floor(product + 1e-9));
    pruned = std::min(pruned, n_query);
    return n_query - pruned;
}

PruneDecision select_tokens(const ImportanceVector& imp, std::size_t k) {
    const std::size_t n = imp.size();
    if (k > n) {
        std::ostringstream msg;
        msg << "k = " << k << " exceeds " << n << " tokens";
        raise(ErrorCode::KOutOfRange, msg.str());
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Descending importance, lower index first among exact ties.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });

    PruneDecision d;
    d.keep_count = k;
    d.ratio = n == 0 ? 0.0 : 1.0 - static_cast<double>(k) / static_cast<double>(n);
    d.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    d.pruned.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    std::sort(d.kept.begin(), d.kept.end());
    std::sort(d.pruned.begin(), d.pruned.end());
    return d;
}

PruneDecision prune(const ImportanceVector& imp, double p) {
    PruneDecision d = select_tokens(imp, keep_count(imp.size(), p));
    d.ratio = p;
    return d;
}

} // namespace catp
