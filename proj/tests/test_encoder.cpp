#include "fleximo/encoder.hpp"

#include "fleximo/rng.hpp"
#include "fleximo/transformer.hpp"

#include <cmath>
#include <doctest.h>

#include "near.hpp"

using namespace fleximo;

namespace {

EncoderConfig small_config() {
    EncoderConfig cfg;
    cfg.depth = 3;
    cfg.heads = 4;
    cfg.d = 32;
    cfg.mlp_ratio = 2;
    cfg.seed = 5;
    return cfg;
}

Mat permute_rows(const Mat& x, const std::vector<std::size_t>& perm) {
    Mat out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(perm[i], j);
    return out;
}

} // namespace

TEST_SUITE("encoder") {

TEST_CASE("attention over a single key returns that value row") {
    Rng rng(1);
    Mat q(3, 4, rng.normals(12));
    Mat k(1, 4, rng.normals(4));
    Mat v(1, 5, rng.normals(5));
    Mat out = attention(q, k, v, 4);
    REQUIRE(out.rows() == 3);
    REQUIRE(out.cols() == 5);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(out(i, j) == v(0, j));
}

TEST_CASE("zero queries average the value rows uniformly") {
    Rng rng(2);
    Mat q(2, 4); // zeros
    Mat k(4, 4, rng.normals(16));
    Mat v(4, 3, rng.normals(12));
    Mat out = attention(q, k, v, 4);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double mean = 0.0;
            for (std::size_t r = 0; r < 4; ++r) mean += v(r, j);
            mean /= 4.0;
            CHECK(out(i, j) == Near(mean, 1e-13));
        }
}

TEST_CASE("attention rows are normalized to numerical precision") {
    Rng rng(3);
    Mat q(16, 8, rng.normals(128));
    Mat k(16, 8, rng.normals(128));
    Mat v(16, 8, rng.normals(128));
    double dev = -1.0;
    (void)attention(q, k, v, 8, &dev);
    CHECK(dev >= 0.0);
    CHECK(dev <= 1e-12);
}

TEST_CASE("attention validates its operand shapes") {
    Mat q(2, 4), k(3, 5), v(3, 2);
    CHECK_THROWS_AS((void)attention(q, k, v, 4), DimensionError);
    Mat k2(3, 4), v2(2, 2);
    CHECK_THROWS_AS((void)attention(q, k2, v2, 4), DimensionError);
}

TEST_CASE("gelu matches its closed form") {
    CHECK(gelu(0.0) == 0.0);
    CHECK(gelu(1.0) == Near(0.8413447460685429, 1e-15));
    CHECK(gelu(-2.0) == Near(-0.04550026389635842, 1e-15));
    CHECK(gelu(30.0) == Near(30.0, 1e-12));
    CHECK(std::abs(gelu(-30.0)) <= 1e-12);
}

TEST_CASE("layer norm standardizes each row then applies the affine map") {
    Rng rng(4);
    Mat x(6, 16, rng.normals(96));
    std::vector<double> g(16, 2.0), b(16, 3.0);
    Mat out = layer_norm(x, g, b, 0.0);
    for (std::size_t i = 0; i < 6; ++i) {
        double mean = 0.0, var = 0.0;
        for (std::size_t j = 0; j < 16; ++j) mean += out(i, j);
        mean /= 16.0;
        for (std::size_t j = 0; j < 16; ++j) {
            const double d = out(i, j) - mean;
            var += d * d;
        }
        var /= 16.0;
        CHECK(mean == Near(3.0, 1e-12));
        CHECK(var == Near(4.0, 1e-9));
    }
}

TEST_CASE("linear layer matches the naive contraction") {
    Rng rng(5);
    Mat x(3, 4, rng.normals(12));
    Mat w(4, 6, rng.normals(24));
    std::vector<double> b = rng.normals(6);
    Mat out = linear(x, w, b);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = b[j];
            for (std::size_t k = 0; k < 4; ++k) acc += x(i, k) * w(k, j);
            CHECK(out(i, j) == Near(acc, 1e-13));
        }
}

TEST_CASE("encoder configuration is validated") {
    EncoderConfig cfg = small_config();
    cfg.d = 30; // not divisible by 4 heads
    CHECK_THROWS_AS((void)init_encoder(cfg), ConfigError);
    cfg = small_config();
    cfg.heads = 0;
    CHECK_THROWS_AS((void)init_encoder(cfg), ConfigError);
    cfg = small_config();
    cfg.mlp_ratio = 0;
    CHECK_THROWS_AS((void)init_encoder(cfg), ConfigError);
}

TEST_CASE("a depth-0 encoder reduces to the final layer norm") {
    EncoderConfig cfg = small_config();
    cfg.depth = 0;
    EncoderWeights w = init_encoder(cfg);
    Rng rng(6);
    Mat x(5, 32, rng.normals(160));
    Mat out = encoder_forward(w, x);
    Mat want = layer_norm(x, w.final_g, w.final_b, cfg.ln_eps);
    CHECK(max_abs_diff(out, want) == 0.0);
}

TEST_CASE("forward pass preserves shape and traces every block") {
    EncoderWeights w = init_encoder(small_config());
    Rng rng(7);
    Mat x(10, 32, rng.normals(320));
    EncoderTrace trace;
    Mat out = encoder_forward(w, x, &trace);
    CHECK(out.rows() == 10);
    CHECK(out.cols() == 32);
    REQUIRE(trace.attn_rowsum_dev.size() == 3);
    for (double dev : trace.attn_rowsum_dev) {
        CHECK(dev >= 0.0);
        CHECK(dev <= 1e-12);
    }
}

TEST_CASE("encoder is permutation-equivariant across token rows") {
    EncoderWeights w = init_encoder(small_config());
    Rng rng(8);
    const std::size_t n = 12;
    Mat x(n, 32, rng.normals(n * 32));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = (i * 7 + 3) % n;
    Mat a = encoder_forward(w, permute_rows(x, perm));
    Mat b = permute_rows(encoder_forward(w, x), perm);
    CHECK(max_abs_diff(a, b) <= 1e-9);
}

TEST_CASE("initialization and forward are bit-deterministic") {
    EncoderConfig cfg = small_config();
    EncoderWeights w1 = init_encoder(cfg);
    EncoderWeights w2 = init_encoder(cfg);
    Rng rng(9);
    Mat x(6, 32, rng.normals(192));
    Mat a = encoder_forward(w1, x);
    Mat b = encoder_forward(w2, x);
    CHECK(max_abs_diff(a, b) == 0.0);

    cfg.seed = 77;
    EncoderWeights w3 = init_encoder(cfg);
    CHECK(max_abs_diff(encoder_forward(w3, x), a) > 0.0);
}

TEST_CASE("token width must match the encoder width") {
    EncoderWeights w = init_encoder(small_config());
    Mat x(4, 33);
    CHECK_THROWS_AS((void)encoder_forward(w, x), DimensionError);
}

TEST_CASE("sequence metadata rides through the encoder") {
    EncoderWeights w = init_encoder(small_config());
    Rng rng(10);
    TokenSequence t;
    t.tokens = Mat(5, 32, rng.normals(160));
    t.grid_h = 2;
    t.grid_w = 2;
    t.has_cls = true;
    TokenSequence out = encoder_forward(w, t);
    CHECK(out.grid_h == 2);
    CHECK(out.grid_w == 2);
    CHECK(out.has_cls);
    CHECK(out.tokens.rows() == 5);
    CHECK(max_abs_diff(out.tokens, encoder_forward(w, t.tokens)) == 0.0);
}

} // TEST_SUITE
