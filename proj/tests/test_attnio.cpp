#include "catp/attnio.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "test_util.hpp"

using namespace catp;
using testutil::TempDir;

namespace {

std::string header_bytes(std::uint32_t version, std::uint32_t kind,
                         std::array<std::uint32_t, 4> dims) {
    std::string out = "CATP";
    auto put = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put(version);
    put(kind);
    for (std::uint32_t d : dims) put(d);
    return out;
}

std::string f32_bytes(std::initializer_list<float> values) {
    std::string out;
    for (float f : values) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
    return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a catp::Error";
    return ErrorCode::IoFailure;
}

} // namespace

TEST(AttnioFormat, SmallestTensorIs32Bytes) {
    TempDir dir("attnio");
    AttnTensor t(1, 1, 1, 1, {1.0});
    write_tensor(t, dir.file("one.attn"));
    std::string bytes = testutil::read_bytes(dir.file("one.attn"));
    ASSERT_EQ(bytes.size(), kHeaderSize + 4);
    EXPECT_EQ(bytes, header_bytes(1, 0, {1, 1, 1, 1}) + f32_bytes({1.0f}));
}

TEST(AttnioFormat, WritingTwiceIsByteIdentical) {
    TempDir dir("attnio");
    AttnTensor t(1, 2, 2, 3, std::vector<double>(12, 0.25));
    write_tensor(t, dir.file("a.attn"));
    write_tensor(t, dir.file("b.attn"));
    EXPECT_EQ(testutil::read_bytes(dir.file("a.attn")), testutil::read_bytes(dir.file("b.attn")));
}

TEST(AttnioFormat, HeaderAloneRecoversDims) {
    TempDir dir("attnio");
    SelfAttnTensor t(2, 3, 4, std::vector<double>(2 * 3 * 4 * 4, 1.0 / 4.0));
    write_tensor(t, dir.file("self.attn"));
    TensorHeader h = read_header(dir.file("self.attn"));
    EXPECT_EQ(h.version, 1u);
    EXPECT_EQ(h.kind, TensorKind::SelfAttention);
    EXPECT_EQ(h.dims, (std::array<std::uint32_t, 4>{2, 3, 4, 4}));
}

TEST(AttnioFormat, KindByteSelectsContainer) {
    TempDir dir("attnio");
    testutil::write_bytes(dir.file("cross.attn"),
                          header_bytes(1, 0, {1, 1, 3, 3}) +
                              f32_bytes({0.8f, 0.1f, 0.1f, 0.5f, 0.35f, 0.15f, 0.4f, 0.3f, 0.3f}));
    AnyTensor any = read_tensor(dir.file("cross.attn"));
    const auto* cross = std::get_if<AttnTensor>(&any);
    ASSERT_NE(cross, nullptr);
    EXPECT_EQ(cross->layers(), 1u);
    EXPECT_EQ(cross->n_query(), 3u);
    EXPECT_EQ(cross->n_image(), 3u);
    EXPECT_DOUBLE_EQ(cross->at(0, 0, 1, 1), static_cast<double>(0.35f));
}

TEST(AttnioFormat, BadMagicRejected) {
    TempDir dir("attnio");
    std::string bytes = header_bytes(1, 0, {1, 1, 1, 1}) + f32_bytes({1.0f});
    bytes.replace(0, 4, "XXXX");
    testutil::write_bytes(dir.file("bad.attn"), bytes);
    EXPECT_EQ(code_of([&] { read_tensor(dir.file("bad.attn")); }), ErrorCode::BadMagic);
}

TEST(AttnioFormat, UnsupportedVersionRejected) {
    TempDir dir("attnio");
    testutil::write_bytes(dir.file("v2.attn"), header_bytes(2, 0, {1, 1, 1, 1}) + f32_bytes({1.0f}));
    EXPECT_EQ(code_of([&] { read_tensor(dir.file("v2.attn")); }), ErrorCode::UnsupportedVersion);
}

TEST(AttnioFormat, TruncatedPayloadRejected) {
    TempDir dir("attnio");
    testutil::write_bytes(dir.file("short.attn"),
                          header_bytes(1, 0, {1, 1, 2, 2}) + f32_bytes({0.5f, 0.5f}));
    EXPECT_EQ(code_of([&] { read_tensor(dir.file("short.attn")); }), ErrorCode::TruncatedPayload);

    testutil::write_bytes(dir.file("headerless.attn"), "CATP\x01");
    EXPECT_EQ(code_of([&] { read_tensor(dir.file("headerless.attn")); }),
              ErrorCode::TruncatedPayload);

    testutil::write_bytes(dir.file("long.attn"),
                          header_bytes(1, 0, {1, 1, 1, 1}) + f32_bytes({1.0f, 1.0f}));
    EXPECT_EQ(code_of([&] { read_tensor(dir.file("long.attn")); }), ErrorCode::TruncatedPayload);
}

TEST(AttnioFormat, NonFinitePayloadRejected) {
    TempDir dir("attnio");
    testutil::write_bytes(dir.file("nan.attn"),
                          header_bytes(1, 0, {1, 1, 1, 1}) +
                              f32_bytes({std::numeric_limits<float>::quiet_NaN()}));
    EXPECT_EQ(code_of([&] { read_tensor(dir.file("nan.attn")); }), ErrorCode::NonFiniteValue);
}

TEST(AttnioFormat, KindMismatchOnTypedRead) {
    TempDir dir("attnio");
    write_tensor(EmbeddingMatrix(2, 2, {1.0, 0.0, 0.0, 1.0}), dir.file("emb.attn"));
    EXPECT_EQ(code_of([&] { read_cross_attention(dir.file("emb.attn")); }),
              ErrorCode::KindMismatch);
    EXPECT_NO_THROW(read_embeddings(dir.file("emb.attn")));
}

TEST(AttnioFormat, MissingFileIsIoFailure) {
    EXPECT_EQ(code_of([&] { read_tensor("/nonexistent/nowhere.attn"); }), ErrorCode::IoFailure);
}

TEST(AttnioContainers, ConstructionRejectsBadValues) {
    EXPECT_EQ(code_of([] { AttnTensor(1, 1, 1, 1, {std::nan("")}); }), ErrorCode::NonFiniteValue);
    EXPECT_EQ(code_of([] { AttnTensor(1, 1, 1, 1, {-0.25}); }), ErrorCode::NegativeValue);
    EXPECT_EQ(code_of([] { AttnTensor(1, 1, 0, 1, {}); }), ErrorCode::InvalidDimensions);
    EXPECT_EQ(code_of([] { AttnTensor(1, 1, 2, 2, {1.0}); }), ErrorCode::InvalidDimensions);
    // embeddings may be negative
    EXPECT_NO_THROW(EmbeddingMatrix(1, 2, {-3.0, 4.0}));
}

TEST(AttnioContainers, ValueTooLargeForF32FailsOnWrite) {
    TempDir dir("attnio");
    AttnTensor t(1, 1, 1, 1, {1e300});
    EXPECT_EQ(code_of([&] { write_tensor(t, dir.file("big.attn")); }), ErrorCode::NonFiniteValue);
    EXPECT_FALSE(std::filesystem::exists(dir.file("big.attn")));
}

TEST(AttnioFormat, RoundTripIsBitExact) {
    std::mt19937_64 rng(0xA77);
    std::uniform_int_distribution<std::size_t> small(1, 8), big(1, 64);
    for (int iter = 0; iter < 25; ++iter) {
        TempDir dir("roundtrip");
        std::size_t L = small(rng), h = small(rng), q = big(rng), j = big(rng);

        AttnTensor cross = testutil::random_attn(rng, L, h, q, j);
        write_tensor(cross, dir.file("c.attn"));
        EXPECT_EQ(read_cross_attention(dir.file("c.attn")), cross);
        write_tensor(read_cross_attention(dir.file("c.attn")), dir.file("c2.attn"));
        EXPECT_EQ(testutil::read_bytes(dir.file("c.attn")), testutil::read_bytes(dir.file("c2.attn")));

        SelfAttnTensor self(L, h, q, testutil::random_f32_payload(rng, L * h * q * q));
        write_tensor(self, dir.file("s.attn"));
        EXPECT_EQ(read_self_attention(dir.file("s.attn")), self);

        EmbeddingMatrix emb(q, j, testutil::random_f32_payload(rng, q * j, true));
        write_tensor(emb, dir.file("e.attn"));
        EXPECT_EQ(read_embeddings(dir.file("e.attn")), emb);
    }
}

TEST(Validate, ExactRowsPass) {
    AttnTensor t(1, 1, 1, 3, {0.8, 0.1, 0.1});
    EXPECT_TRUE(validate_normalization(t, 1e-4).empty());
}

TEST(Validate, ShortRowReported) {
    AttnTensor t(1, 1, 1, 2, {0.5, 0.4});
    auto bad = validate_normalization(t, 1e-4);
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_EQ(bad[0], (RowId{0, 0, 0}));
}

TEST(Validate, ViolationsComeOutSorted) {
    // bad rows at (0,0,1), (1,0,0), (1,1,1)
    std::vector<double> data = {
        0.5, 0.5, // l0 h0 q0 ok
        0.9, 0.0, // l0 h0 q1 bad
        0.5, 0.5, // l0 h1 q0 ok
        0.5, 0.5, // l0 h1 q1 ok
        0.2, 0.2, // l1 h0 q0 bad
        0.5, 0.5, // l1 h0 q1 ok
        1.0, 0.0, // l1 h1 q0 ok
        0.6, 0.6, // l1 h1 q1 bad
    };
    AttnTensor t(2, 2, 2, 2, data);
    auto bad = validate_normalization(t, 1e-4);
    ASSERT_EQ(bad.size(), 3u);
    EXPECT_EQ(bad[0], (RowId{0, 0, 1}));
    EXPECT_EQ(bad[1], (RowId{1, 0, 0}));
    EXPECT_EQ(bad[2], (RowId{1, 1, 1}));
    EXPECT_TRUE(std::is_sorted(bad.begin(), bad.end()));
}

TEST(Validate, DoesNotMutateInput) {
    AttnTensor t(1, 1, 2, 2, {0.5, 0.5, 0.3, 0.3});
    AttnTensor copy = t;
    validate_normalization(t, 1e-4);
    EXPECT_EQ(t, copy);
}

TEST(SliceLayers, AllIsIdentity) {
    std::mt19937_64 rng(3);
    AttnTensor t = testutil::random_attn(rng, 6, 2, 3, 4);
    EXPECT_EQ(slice_layers(t, LayerSelection::all()), t);
}

TEST(SliceLayers, FirstTakesLayerZero) {
    std::mt19937_64 rng(4);
    AttnTensor t = testutil::random_attn(rng, 6, 2, 3, 4);
    AttnTensor first = slice_layers(t, LayerSelection::first());
    ASSERT_EQ(first.layers(), 1u);
    for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t q = 0; q < 3; ++q)
            for (std::size_t j = 0; j < 4; ++j)
                EXPECT_EQ(first.at(0, h, q, j), t.at(0, h, q, j));
}

TEST(SliceLayers, SubsetKeepsAscendingOriginalOrder) {
    std::mt19937_64 rng(5);
    AttnTensor t = testutil::random_attn(rng, 6, 1, 2, 2);
    AttnTensor picked = slice_layers(t, LayerSelection::subset({1, 4}));
    ASSERT_EQ(picked.layers(), 2u);
    EXPECT_EQ(picked.at(0, 0, 0, 0), t.at(1, 0, 0, 0));
    EXPECT_EQ(picked.at(1, 0, 1, 1), t.at(4, 0, 1, 1));
}

TEST(SliceLayers, OutOfRangeIndexThrows) {
    std::mt19937_64 rng(6);
    AttnTensor t = testutil::random_attn(rng, 6, 1, 2, 2);
    EXPECT_EQ(code_of([&] { slice_layers(t, LayerSelection::single(6)); }),
              ErrorCode::LayerOutOfRange);
}

TEST(LayerSelectionText, DescribeParseRoundTrip) {
    for (const auto& sel :
         {LayerSelection::all(), LayerSelection::first(), LayerSelection::single(3),
          LayerSelection::subset({0, 2, 5})}) {
        EXPECT_EQ(LayerSelection::parse(sel.describe()), sel);
    }
    EXPECT_THROW(LayerSelection::parse("sometimes"), Error);
    EXPECT_THROW(LayerSelection::subset({2, 1}), Error);
    EXPECT_THROW(LayerSelection::subset({1, 1}), Error);
}
