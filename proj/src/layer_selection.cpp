#include "catp/layer_selection.hpp"

#include <charconv>
#include <numeric>
#include <sstream>

#include "catp/error.hpp"

namespace catp {

namespace {

std::size_t parse_index(std::string_view text) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        raise(ErrorCode::LayerOutOfRange, "bad layer index '" + std::string(text) + "'");
    return value;
}

} // namespace

LayerSelection LayerSelection::single(std::size_t index) {
    return LayerSelection(Kind::Single, {index});
}

LayerSelection LayerSelection::subset(std::vector<std::size_t> indices) {
    if (indices.empty())
        raise(ErrorCode::LayerOutOfRange, "subset selection needs at least one layer");
    for (std::size_t i = 1; i < indices.size(); ++i) {
        if (indices[i] <= indices[i - 1])
            raise(ErrorCode::LayerOutOfRange, "subset indices must be ascending and unique");
    }
    return LayerSelection(Kind::Subset, std::move(indices));
}

std::vector<std::size_t> LayerSelection::resolve(std::size_t n_layers) const {
    std::vector<std::size_t> out;
    switch (kind_) {
    case Kind::All:
        out.resize(n_layers);
        std::iota(out.begin(), out.end(), std::size_t{0});
        break;
    case Kind::First:
        out = {0};
        break;
    case Kind::Single:
    case Kind::Subset:
        out = indices_;
        break;
    }
    for (std::size_t idx : out) {
        if (idx >= n_layers) {
            std::ostringstream msg;
            msg << "layer " << idx << " out of range for a " << n_layers << "-layer tensor";
            raise(ErrorCode::LayerOutOfRange, msg.str());
        }
    }
    if (out.empty()) raise(ErrorCode::LayerOutOfRange, "selection resolves to no layers");
    return out;
}

std::string LayerSelection::describe() const {
    switch (kind_) {
    case Kind::All: return "all";
    case Kind::First: return "first";
    case Kind::Single: return "single:" + std::to_string(indices_[0]);
    case Kind::Subset: {
        std::string out = "subset:";
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(indices_[i]);
        }
        return out;
    }
    }
    return "all";
}

LayerSelection LayerSelection::parse(const std::string& text) {
    if (text == "all") return all();
    if (text == "first") return first();
    if (text.rfind("single:", 0) == 0) return single(parse_index(std::string_view(text).substr(7)));
    if (text.rfind("subset:", 0) == 0) {
        std::vector<std::size_t> indices;
        std::string_view rest = std::string_view(text).substr(7);
        while (!rest.empty()) {
            std::size_t comma = rest.find(',');
            indices.push_back(parse_index(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return subset(std::move(indices));
    }
    raise(ErrorCode::LayerOutOfRange,
          "bad layer selection '" + text + "' (want all|first|single:K|subset:A,B,...)");
}

} // namespace catp
