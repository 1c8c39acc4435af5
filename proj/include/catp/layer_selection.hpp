#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace catp {

/// Which attention layers feed a computation: all of them, the first one,
/// a single index, or an ascending unique subset.
class LayerSelection {
public:
    enum class Kind { All, First, Single, Subset };

    static LayerSelection all() { return LayerSelection(Kind::All, {}); }
    static LayerSelection first() { return LayerSelection(Kind::First, {}); }
    static LayerSelection single(std::size_t index);
    static LayerSelection subset(std::vector<std::size_t> indices);

    Kind kind() const noexcept { return kind_; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    /// Concrete ascending layer indices for a stack of `n_layers` layers.
    /// Throws LayerOutOfRange if any index is out of bounds.
    std::vector<std::size_t> resolve(std::size_t n_layers) const;

    /// Stable textual form: "all", "first", "single:3", "subset:0,2,5".
    std::string describe() const;

    /// Inverse of describe(). Throws on malformed input.
    static LayerSelection parse(const std::string& text);

    bool operator==(const LayerSelection&) const = default;

private:
    LayerSelection(Kind kind, std::vector<std::size_t> indices)
        : kind_(kind), indices_(std::move(indices)) {}

    Kind kind_;
    std::vector<std::size_t> indices_;
};

} // namespace catp
