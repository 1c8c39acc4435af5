#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catp/voting.hpp"

namespace catp {

inline constexpr const char* kToolVersion = "1.0.0";

// Reports are line-delimited "key = value" text with a fixed key order and
// shortest-round-trip number formatting, so identical runs diff clean.
// Absent scalars and empty id lists serialize as "-".

/// One method's importance scores and (optionally) its prune decision.
struct Report {
    std::string method;        // catp | catp-weighted | l2 | selfattn
    std::string layers;        // LayerSelection::describe() text
    bool weighted = false;
    std::string input;         // path the tensor came from
    std::string weights_input; // path of the weighting tensor, if any
    std::string seed;          // generator seed when known
    std::string tool_version = kToolVersion;
    std::optional<double> ratio;
    std::vector<double> importance;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> pruned;

    bool operator==(const Report&) const = default;
};

std::string serialize(const Report& report);
Report parse_report(const std::string& text);

struct ComparisonEntry {
    std::string label; // e.g. "catp@all", "l2"
    std::vector<std::size_t> kept;
    double retained_mass = 0.0;

    bool operator==(const ComparisonEntry&) const = default;
};

/// Side-by-side kept sets of several methods plus pairwise Jaccard overlap
/// and the importance mass each kept set retains under the reference
/// entry's importance.
struct ComparisonReport {
    std::string tool_version = kToolVersion;
    std::string input_cross;
    std::string input_self;
    std::string input_emb;
    double ratio = 0.0;
    std::size_t n_tokens = 0;
    std::size_t reference = 0; // index of the mass-reference entry
    std::vector<ComparisonEntry> entries;
    std::vector<std::vector<double>> jaccard; // square, symmetric, diagonal 1

    bool operator==(const ComparisonReport&) const = default;
};

std::string serialize(const ComparisonReport& report);
ComparisonReport parse_comparison(const std::string& text);

/// |A n B| / |A u B| over ascending id lists; 1 when both are empty.
double jaccard_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Importance mass inside `kept` divided by total mass; 0 when the total
/// is 0.
double retained_mass(std::span<const std::size_t> kept, const ImportanceVector& reference);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

} // namespace catp
