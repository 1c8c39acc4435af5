#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "catp/error.hpp"
#include "catp/layer_selection.hpp"

namespace catp {

// On-disk payload is f32; in memory everything is held as double so that
// downstream arithmetic runs at 64-bit precision.

enum class TensorKind : std::uint32_t {
    CrossAttention = 0,
    SelfAttention = 1,
    Embeddings = 2,
};

const char* to_string(TensorKind kind);

/// Cross-attention probability map [layer][head][query][image], row-major.
/// Each (layer, head, query) row is a distribution over image tokens.
class AttnTensor {
public:
    AttnTensor(std::size_t layers, std::size_t heads, std::size_t n_query, std::size_t n_image,
               std::vector<double> data);

    std::size_t layers() const noexcept { return layers_; }
    std::size_t heads() const noexcept { return heads_; }
    std::size_t n_query() const noexcept { return n_query_; }
    std::size_t n_image() const noexcept { return n_image_; }

    double at(std::size_t layer, std::size_t head, std::size_t query, std::size_t image) const {
        return data_[((layer * heads_ + head) * n_query_ + query) * n_image_ + image];
    }
    /// Contiguous image-axis row for one (layer, head, query).
    std::span<const double> row(std::size_t layer, std::size_t head, std::size_t query) const {
        return {data_.data() + ((layer * heads_ + head) * n_query_ + query) * n_image_, n_image_};
    }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const AttnTensor&) const = default;

private:
    std::size_t layers_, heads_, n_query_, n_image_;
    std::vector<double> data_;
};

/// Self-attention map [layer][head][sender][receiver], row-normalized over
/// the receiver axis.
class SelfAttnTensor {
public:
    SelfAttnTensor(std::size_t layers, std::size_t heads, std::size_t n_tokens,
                   std::vector<double> data);

    std::size_t layers() const noexcept { return layers_; }
    std::size_t heads() const noexcept { return heads_; }
    std::size_t n_tokens() const noexcept { return n_tokens_; }

    double at(std::size_t layer, std::size_t head, std::size_t sender, std::size_t receiver) const {
        return data_[((layer * heads_ + head) * n_tokens_ + sender) * n_tokens_ + receiver];
    }
    std::span<const double> row(std::size_t layer, std::size_t head, std::size_t sender) const {
        return {data_.data() + ((layer * heads_ + head) * n_tokens_ + sender) * n_tokens_, n_tokens_};
    }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const SelfAttnTensor&) const = default;

private:
    std::size_t layers_, heads_, n_tokens_;
    std::vector<double> data_;
};

/// Dense [token][dim] matrix of token embeddings.
class EmbeddingMatrix {
public:
    EmbeddingMatrix(std::size_t n_tokens, std::size_t dim, std::vector<double> data);

    std::size_t n_tokens() const noexcept { return n_tokens_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> row(std::size_t token) const {
        return {data_.data() + token * dim_, dim_};
    }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const EmbeddingMatrix&) const = default;

private:
    std::size_t n_tokens_, dim_;
    std::vector<double> data_;
};

using AnyTensor = std::variant<AttnTensor, SelfAttnTensor, EmbeddingMatrix>;

// CATP-ATTN v1 container, little-endian throughout:
//   bytes  0..4   magic "CATP"
//   bytes  4..8   version u32 = 1
//   bytes  8..12  kind u32 (0 cross-attention, 1 self-attention, 2 embeddings)
//   bytes 12..28  four u32 dims (cross: L,h,L0,L1; self: L,h,N,N; emb: 1,1,n,d)
//   bytes 28..    f32 payload, row-major in declared axis order
inline constexpr std::size_t kHeaderSize = 28;
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::array<char, 4> kMagic = {'C', 'A', 'T', 'P'};

struct TensorHeader {
    std::uint32_t version;
    TensorKind kind;
    std::array<std::uint32_t, 4> dims;

    std::size_t element_count() const;
};

/// Decodes the 28-byte header only; the payload is not touched.
TensorHeader read_header(const std::filesystem::path& path);

AnyTensor read_tensor(const std::filesystem::path& path);

// Typed readers; throw KindMismatch when the file holds something else.
AttnTensor read_cross_attention(const std::filesystem::path& path);
SelfAttnTensor read_self_attention(const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

void write_tensor(const AttnTensor& t, const std::filesystem::path& path);
void write_tensor(const SelfAttnTensor& t, const std::filesystem::path& path);
void write_tensor(const EmbeddingMatrix& t, const std::filesystem::path& path);
void write_tensor(const AnyTensor& t, const std::filesystem::path& path);

/// Identifies one normalized row of an attention tensor.
struct RowId {
    std::size_t layer, head, row;
    auto operator<=>(const RowId&) const = default;
};

/// Rows whose normalized-axis sum differs from 1 by more than `tol`,
/// in lexicographic (layer, head, row) order. Pure; tol must be > 0.
std::vector<RowId> validate_normalization(const AttnTensor& t, double tol);
std::vector<RowId> validate_normalization(const SelfAttnTensor& t, double tol);

/// New tensor holding exactly the selected layers, ascending original order.
AttnTensor slice_layers(const AttnTensor& t, const LayerSelection& sel);

} // namespace catp
