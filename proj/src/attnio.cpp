#include "catp/attnio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace catp {

namespace {

std::size_t checked_product(std::span<const std::size_t> dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) raise(ErrorCode::InvalidDimensions, "every dimension must be >= 1");
        if (d > std::numeric_limits<std::size_t>::max() / n)
            raise(ErrorCode::InvalidDimensions, "dimension product overflows");
        n *= d;
    }
    return n;
}

void check_payload(const std::vector<double>& data, std::size_t expected, bool non_negative,
                   const char* what) {
    if (data.size() != expected) {
        std::ostringstream msg;
        msg << what << " payload holds " << data.size() << " values, dims require " << expected;
        raise(ErrorCode::InvalidDimensions, msg.str());
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            std::ostringstream msg;
            msg << what << " value at flat index " << i << " is not finite";
            raise(ErrorCode::NonFiniteValue, msg.str());
        }
        if (non_negative && data[i] < 0.0) {
            std::ostringstream msg;
            msg << what << " value at flat index " << i << " is negative";
            raise(ErrorCode::NegativeValue, msg.str());
        }
    }
}

std::uint32_t to_u32_dim(std::size_t d) {
    if (d > std::numeric_limits<std::uint32_t>::max())
        raise(ErrorCode::InvalidDimensions, "dimension exceeds u32 range");
    return static_cast<std::uint32_t>(d);
}

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// f32 bits <-> float, independent of host endianness.
float f32_from_bits(std::uint32_t bits) {
    float f;
    static_assert(sizeof(f) == sizeof(bits));
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

std::uint32_t f32_to_bits(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    return bits;
}

TensorHeader decode_header(const unsigned char* raw, const std::filesystem::path& path) {
    if (std::memcmp(raw, kMagic.data(), kMagic.size()) != 0)
        raise(ErrorCode::BadMagic, "not a CATP-ATTN file: " + path.string());
    TensorHeader h;
    h.version = get_u32(raw + 4);
    if (h.version != kFormatVersion) {
        std::ostringstream msg;
        msg << path.string() << " has version " << h.version << ", expected " << kFormatVersion;
        raise(ErrorCode::UnsupportedVersion, msg.str());
    }
    std::uint32_t kind = get_u32(raw + 8);
    if (kind > 2) {
        std::ostringstream msg;
        msg << path.string() << " declares unknown tensor kind " << kind;
        raise(ErrorCode::KindMismatch, msg.str());
    }
    h.kind = static_cast<TensorKind>(kind);
    for (int i = 0; i < 4; ++i) h.dims[i] = get_u32(raw + 12 + 4 * i);
    return h;
}

std::string encode_header(TensorKind kind, std::span<const std::size_t> dims) {
    std::string out;
    out.reserve(kHeaderSize);
    out.append(kMagic.data(), kMagic.size());
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(kind));
    for (std::size_t d : dims) put_u32(out, to_u32_dim(d));
    return out;
}

void write_file(const std::filesystem::path& path, TensorKind kind,
                std::span<const std::size_t> dims, const std::vector<double>& data) {
    std::string bytes = encode_header(kind, dims);
    bytes.reserve(kHeaderSize + data.size() * 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
        float f = static_cast<float>(data[i]);
        if (!std::isfinite(f)) {
            std::ostringstream msg;
            msg << "value at flat index " << i << " does not fit f32";
            raise(ErrorCode::NonFiniteValue, msg.str());
        }
        put_u32(bytes, f32_to_bits(f));
    }

    // Write to a sibling temp file, then rename over the target.
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) raise(ErrorCode::IoFailure, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        raise(ErrorCode::IoFailure, "cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::vector<double> decode_payload(std::ifstream& in, const TensorHeader& h,
                                   const std::filesystem::path& path) {
    std::size_t count = h.element_count();
    if (count > std::numeric_limits<std::size_t>::max() / 4)
        raise(ErrorCode::InvalidDimensions, path.string() + ": dims overflow the payload size");
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        std::ostringstream msg;
        msg << path.string() << ": payload ends after " << in.gcount() << " of " << raw.size()
            << " bytes";
        raise(ErrorCode::TruncatedPayload, msg.str());
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        raise(ErrorCode::TruncatedPayload,
              path.string() + ": trailing bytes after declared payload");
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        float f = f32_from_bits(get_u32(raw.data() + 4 * i));
        if (!std::isfinite(f)) {
            std::ostringstream msg;
            msg << path.string() << ": non-finite value at flat index " << i;
            raise(ErrorCode::NonFiniteValue, msg.str());
        }
        data[i] = static_cast<double>(f);
    }
    return data;
}

} // namespace

const char* to_string(TensorKind kind) {
    switch (kind) {
    case TensorKind::CrossAttention: return "cross-attention";
    case TensorKind::SelfAttention: return "self-attention";
    case TensorKind::Embeddings: return "embeddings";
    }
    return "unknown";
}

std::size_t TensorHeader::element_count() const {
    std::size_t dims_sz[4];
    for (int i = 0; i < 4; ++i) dims_sz[i] = dims[i];
    return checked_product(dims_sz);
}

AttnTensor::AttnTensor(std::size_t layers, std::size_t heads, std::size_t n_query,
                       std::size_t n_image, std::vector<double> data)
    : layers_(layers), heads_(heads), n_query_(n_query), n_image_(n_image),
      data_(std::move(data)) {
    const std::size_t dims[] = {layers_, heads_, n_query_, n_image_};
    check_payload(data_, checked_product(dims), /*non_negative=*/true, "cross-attention");
}

SelfAttnTensor::SelfAttnTensor(std::size_t layers, std::size_t heads, std::size_t n_tokens,
                               std::vector<double> data)
    : layers_(layers), heads_(heads), n_tokens_(n_tokens), data_(std::move(data)) {
    const std::size_t dims[] = {layers_, heads_, n_tokens_, n_tokens_};
    check_payload(data_, checked_product(dims), /*non_negative=*/true, "self-attention");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t n_tokens, std::size_t dim, std::vector<double> data)
    : n_tokens_(n_tokens), dim_(dim), data_(std::move(data)) {
    const std::size_t dims[] = {n_tokens_, dim_};
    check_payload(data_, checked_product(dims), /*non_negative=*/false, "embeddings");
}

TensorHeader read_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot open " + path.string());
    unsigned char raw[kHeaderSize];
    in.read(reinterpret_cast<char*>(raw), kHeaderSize);
    if (static_cast<std::size_t>(in.gcount()) != kHeaderSize)
        raise(ErrorCode::TruncatedPayload, path.string() + ": shorter than the 28-byte header");
    return decode_header(raw, path);
}

AnyTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot open " + path.string());
    unsigned char raw[kHeaderSize];
    in.read(reinterpret_cast<char*>(raw), kHeaderSize);
    if (static_cast<std::size_t>(in.gcount()) != kHeaderSize)
        raise(ErrorCode::TruncatedPayload, path.string() + ": shorter than the 28-byte header");
    TensorHeader h = decode_header(raw, path);
    std::vector<double> data = decode_payload(in, h, path);

    switch (h.kind) {
    case TensorKind::CrossAttention:
        return AttnTensor(h.dims[0], h.dims[1], h.dims[2], h.dims[3], std::move(data));
    case TensorKind::SelfAttention:
        if (h.dims[2] != h.dims[3])
            raise(ErrorCode::InvalidDimensions,
                  path.string() + ": self-attention dims 2 and 3 must match");
        return SelfAttnTensor(h.dims[0], h.dims[1], h.dims[2], std::move(data));
    case TensorKind::Embeddings:
        if (h.dims[0] != 1 || h.dims[1] != 1)
            raise(ErrorCode::InvalidDimensions,
                  path.string() + ": embeddings dims 0 and 1 must be 1");
        return EmbeddingMatrix(h.dims[2], h.dims[3], std::move(data));
    }
    raise(ErrorCode::KindMismatch, "unreachable kind");
}

namespace {

template <typename T>
T read_as(const std::filesystem::path& path, TensorKind want) {
    AnyTensor any = read_tensor(path);
    if (auto* t = std::get_if<T>(&any)) return std::move(*t);
    TensorKind got = static_cast<TensorKind>(any.index());
    raise(ErrorCode::KindMismatch, path.string() + " holds " + to_string(got) + ", expected " +
                                       to_string(want));
}

} // namespace

AttnTensor read_cross_attention(const std::filesystem::path& path) {
    return read_as<AttnTensor>(path, TensorKind::CrossAttention);
}

SelfAttnTensor read_self_attention(const std::filesystem::path& path) {
    return read_as<SelfAttnTensor>(path, TensorKind::SelfAttention);
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
    return read_as<EmbeddingMatrix>(path, TensorKind::Embeddings);
}

void write_tensor(const AttnTensor& t, const std::filesystem::path& path) {
    const std::size_t dims[] = {t.layers(), t.heads(), t.n_query(), t.n_image()};
    write_file(path, TensorKind::CrossAttention, dims, t.data());
}

void write_tensor(const SelfAttnTensor& t, const std::filesystem::path& path) {
    const std::size_t dims[] = {t.layers(), t.heads(), t.n_tokens(), t.n_tokens()};
    write_file(path, TensorKind::SelfAttention, dims, t.data());
}

void write_tensor(const EmbeddingMatrix& t, const std::filesystem::path& path) {
    const std::size_t dims[] = {1, 1, t.n_tokens(), t.dim()};
    write_file(path, TensorKind::Embeddings, dims, t.data());
}

void write_tensor(const AnyTensor& t, const std::filesystem::path& path) {
    std::visit([&](const auto& tensor) { write_tensor(tensor, path); }, t);
}

namespace {

template <typename Tensor>
std::vector<RowId> validate_rows(const Tensor& t, std::size_t rows_per_block,
                                 std::size_t row_len, double tol) {
    if (!(tol > 0.0)) raise(ErrorCode::RatioOutOfRange, "tolerance must be > 0");
    std::vector<RowId> bad;
    const std::vector<double>& data = t.data();
    std::size_t idx = 0;
    for (std::size_t l = 0; l < t.layers(); ++l) {
        for (std::size_t h = 0; h < t.heads(); ++h) {
            for (std::size_t r = 0; r < rows_per_block; ++r) {
                double sum = 0.0;
                for (std::size_t c = 0; c < row_len; ++c) sum += data[idx++];
                if (std::abs(sum - 1.0) > tol) bad.push_back(RowId{l, h, r});
            }
        }
    }
    return bad; // iteration order is already lexicographic
}

} // namespace

std::vector<RowId> validate_normalization(const AttnTensor& t, double tol) {
    return validate_rows(t, t.n_query(), t.n_image(), tol);
}

std::vector<RowId> validate_normalization(const SelfAttnTensor& t, double tol) {
    return validate_rows(t, t.n_tokens(), t.n_tokens(), tol);
}

AttnTensor slice_layers(const AttnTensor& t, const LayerSelection& sel) {
    std::vector<std::size_t> picked = sel.resolve(t.layers());
    std::size_t block = t.heads() * t.n_query() * t.n_image();
    std::vector<double> data;
    data.reserve(picked.size() * block);
    for (std::size_t l : picked) {
        auto begin = t.data().begin() + static_cast<std::ptrdiff_t>(l * block);
        data.insert(data.end(), begin, begin + static_cast<std::ptrdiff_t>(block));
    }
    return AttnTensor(picked.size(), t.heads(), t.n_query(), t.n_image(), std::move(data));
}

} // namespace catp
