#include "fleximo/suites.hpp"

#include "fleximo/diagnostics.hpp"
#include "fleximo/encoder.hpp"
#include "fleximo/linalg.hpp"
#include "fleximo/resize.hpp"
#include "fleximo/rng.hpp"
#include "fleximo/wavegen.hpp"

#include <algorithm>
#include <cmath>

namespace fleximo {

bool SuiteResult::pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

const CheckResult* SuiteResult::first_failure() const {
    for (const CheckResult& c : checks)
        if (!c.pass) return &c;
    return nullptr;
}

std::vector<std::string> suite_names() {
    return {"pinv", "recovery", "equivariance", "tokens"};
}

namespace {

void push(SuiteResult& r, const std::string& name, double value, double limit,
          const std::string& detail = "") {
    r.checks.push_back({name, value <= limit, value, limit, detail});
}

Mat random_mat(std::size_t rows, std::size_t cols, Rng& rng) {
    return Mat(rows, cols, rng.normals(rows * cols));
}

Tensor4 random_kernel(std::size_t d, std::size_t c, std::size_t p, Rng& rng) {
    return Tensor4({d, c, p, p}, rng.normals(d * c * p * p));
}

std::vector<double> slice_vec(const Tensor4& k, std::size_t s) {
    const std::size_t px = k.dim(2) * k.dim(3);
    return std::vector<double>(k.data().begin() + s * px,
                               k.data().begin() + (s + 1) * px);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> matvec(const Mat& m, const std::vector<double>& x) {
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

SuiteResult suite_pinv() {
    SuiteResult r;
    r.suite = "pinv";
    Rng rng(20240915);

    const std::size_t quads[][4] = {{4, 4, 8, 8},  {8, 8, 4, 4},  {3, 5, 7, 2},
                                    {2, 2, 12, 12}, {12, 12, 5, 5}, {6, 6, 6, 6}};
    for (const auto& q : quads) {
        const ResizeOperator op = build_resize_matrix(q[0], q[1], q[2], q[3]);
        const std::string tag = std::to_string(q[0]) + "x" + std::to_string(q[1]) +
                                "->" + std::to_string(q[2]) + "x" + std::to_string(q[3]);

        double row_dev = 0.0, range_dev = 0.0;
        for (std::size_t i = 0; i < op.m.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < op.m.cols(); ++j) {
                const double v = op.m(i, j);
                s += v;
                range_dev = std::max(range_dev, std::max(-v, v - 1.0));
            }
            row_dev = std::max(row_dev, std::abs(s - 1.0));
        }
        push(r, "operator-row-sums " + tag, row_dev, 1e-12);
        push(r, "operator-entry-range " + tag, range_dev, 0.0,
             "entries must lie in [0,1]");

        double faith = 0.0;
        for (int t = 0; t < 5; ++t) {
            Mat img = random_mat(q[0], q[1], rng);
            const Mat oracle = bilinear_resize_2d(img, q[2], q[3]);
            const auto via_m = matvec(op.m, img.data());
            for (std::size_t i = 0; i < via_m.size(); ++i)
                faith = std::max(faith, std::abs(via_m[i] - oracle.data()[i]));
        }
        push(r, "operator-faithfulness " + tag, faith, 1e-12);

        push(r, "penrose " + tag,
             moore_penrose_residuals(op.m, pinv(op.m)).max(), 1e-8);
        const Mat mt = transpose(op.m);
        push(r, "penrose-transpose " + tag,
             moore_penrose_residuals(mt, pinv(mt)).max(), 1e-8);
    }

    const Mat a = random_mat(12, 7, rng);
    push(r, "penrose random-12x7", moore_penrose_residuals(a, pinv(a)).max(), 1e-8);

    const Mat d2(2, 2, {2.0, 0.0, 0.0, 0.0});
    push(r, "pinv diag(2,0)", max_abs_diff(pinv(d2), Mat(2, 2, {0.5, 0, 0, 0})), 0.0);
    push(r, "pinv identity", max_abs_diff(pinv(Mat::identity(4)), Mat::identity(4)), 0.0);
    return r;
}

SuiteResult suite_recovery() {
    SuiteResult r;
    r.suite = "recovery";
    Rng rng(77001);

    // Upsampling: token dot products are exactly preserved (within rounding).
    const std::size_t up_pairs[][2] = {{4, 8}, {3, 7}, {8, 16}};
    for (const auto& pr : up_pairs) {
        const std::size_t p = pr[0], pp = pr[1];
        const ResizeOperator op = build_resize_matrix(p, p, pp, pp);
        Tensor4 k = random_kernel(3, 2, p, rng);
        const Tensor4 k_up = pi_resize_kernel(k, pp);
        double worst = 0.0;
        for (std::size_t s = 0; s < 6; ++s) {
            const auto w_old = slice_vec(k, s);
            const auto w_new = slice_vec(k_up, s);
            for (int t = 0; t < 30; ++t) {
                const auto x = rng.normals(p * p);
                const double d_old = dot(x, w_old);
                const double d_new = dot(matvec(op.m, x), w_new);
                worst = std::max(worst,
                                 std::abs(d_new - d_old) / (1.0 + std::abs(d_old)));
            }
        }
        push(r, "upsample-recovery " + std::to_string(p) + "->" + std::to_string(pp),
             worst, 1e-10);
    }

    // Downsampling agrees with the least-squares oracle slice by slice.
    const std::size_t down_pairs[][2] = {{8, 4}, {16, 8}};
    for (const auto& pr : down_pairs) {
        const std::size_t p = pr[0], pp = pr[1];
        const ResizeOperator op = build_resize_matrix(p, p, pp, pp);
        const Mat mt = transpose(op.m);
        Tensor4 k = random_kernel(2, 2, p, rng);
        const Tensor4 k_dn = pi_resize_kernel(k, pp);
        double worst = 0.0;
        for (std::size_t s = 0; s < 4; ++s) {
            const Mat rhs(p * p, 1, slice_vec(k, s));
            const Mat x = lstsq(mt, rhs);
            const auto got = slice_vec(k_dn, s);
            for (std::size_t i = 0; i < got.size(); ++i)
                worst = std::max(worst, std::abs(got[i] - x(i, 0)));
        }
        push(r, "downsample-lstsq " + std::to_string(p) + "->" + std::to_string(pp),
             worst, 1e-8);
    }

    // The adjoint of the upsampling operator undoes the PI upsample exactly:
    // M^T (M^T)^+ = I when M has full column rank.
    {
        const std::size_t p = 4, pp = 8;
        const ResizeOperator op = build_resize_matrix(p, p, pp, pp);
        const Mat mt = transpose(op.m);
        Tensor4 k = random_kernel(2, 1, p, rng);
        const Tensor4 k_up = pi_resize_kernel(k, pp);
        double worst = 0.0;
        for (std::size_t s = 0; s < 2; ++s) {
            const auto back = matvec(mt, slice_vec(k_up, s));
            const auto orig = slice_vec(k, s);
            for (std::size_t i = 0; i < back.size(); ++i)
                worst = std::max(worst, std::abs(back[i] - orig[i]));
        }
        push(r, "adjoint-inverts-upsample 4->8", worst, 1e-8);
    }

    // Constant kernels survive a PI up-then-down round trip.
    {
        Tensor4 k({1, 1, 4, 4}, std::vector<double>(16, 0.73));
        const Tensor4 back = pi_resize_kernel(pi_resize_kernel(k, 8), 4);
        double worst = 0.0;
        for (std::size_t i = 0; i < 16; ++i)
            worst = std::max(worst, std::abs(back.data()[i] - 0.73));
        push(r, "constant-kernel-roundtrip 4->8->4", worst, 1e-8);
    }
    return r;
}

SuiteResult suite_equivariance() {
    SuiteResult r;
    r.suite = "equivariance";

    GeneratorConfig cfg;
    cfg.token_dim = 64;
    cfg.out_dim = 8;
    cfg.base_patch = 4;
    cfg.depth = 2;
    cfg.heads = 4;
    cfg.seed = 31;
    const GeneratorWeights w = init_generator(cfg);

    WavelengthSpec spec{{0.49, 0.56, 0.665, 0.842}};
    const DynamicKernel base = generate_kernel(w, spec);

    {
        const DynamicKernel again = generate_kernel(init_generator(cfg), spec);
        double dev = 0.0;
        for (std::size_t i = 0; i < base.weights.size(); ++i)
            dev = std::max(dev, std::abs(base.weights.data()[i] -
                                         again.weights.data()[i]));
        for (std::size_t d = 0; d < cfg.out_dim; ++d)
            dev = std::max(dev, std::abs(base.bias[d] - again.bias[d]));
        push(r, "generator-determinism", dev, 0.0, "same seed must be bit-identical");
    }

    {
        const std::size_t c = spec.channels();
        std::vector<std::size_t> perm = {2, 0, 3, 1};
        WavelengthSpec pspec;
        pspec.lambdas_um.resize(c);
        for (std::size_t i = 0; i < c; ++i) pspec.lambdas_um[i] = spec.lambdas_um[perm[i]];
        const DynamicKernel pk = generate_kernel(w, pspec);

        double scale = std::max(1e-30, max_abs(Mat(1, base.weights.size(), base.weights.data())));
        double worst = 0.0;
        const std::size_t p = cfg.base_patch;
        for (std::size_t d = 0; d < cfg.out_dim; ++d)
            for (std::size_t i = 0; i < c; ++i)
                for (std::size_t y = 0; y < p; ++y)
                    for (std::size_t x = 0; x < p; ++x)
                        worst = std::max(worst, std::abs(pk.weights(d, i, y, x) -
                                                         base.weights(d, perm[i], y, x)));
        push(r, "channel-permutation-equivariance", worst / scale, 1e-6,
             "relative to the max |weight|");

        double bias_dev = 0.0, bias_scale = 1e-30;
        for (std::size_t d = 0; d < cfg.out_dim; ++d) {
            bias_dev = std::max(bias_dev, std::abs(pk.bias[d] - base.bias[d]));
            bias_scale = std::max(bias_scale, std::abs(base.bias[d]));
        }
        push(r, "bias-permutation-invariance", bias_dev / bias_scale, 1e-6);
    }

    {
        EncoderConfig ec;
        ec.depth = 3;
        ec.heads = 4;
        ec.d = 64;
        ec.seed = 5;
        const EncoderWeights ew = init_encoder(ec);
        Rng rng(99);
        const Mat tokens = random_mat(10, ec.d, rng);

        EncoderTrace trace;
        const Mat out = encoder_forward(ew, tokens, &trace);
        double attn_dev = 0.0;
        for (double d : trace.attn_rowsum_dev) attn_dev = std::max(attn_dev, d);
        push(r, "attention-row-stochasticity", attn_dev, 1e-12);

        std::vector<std::size_t> perm(tokens.rows());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 7 + 3) % perm.size();
        Mat ptokens(tokens.rows(), tokens.cols());
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = 0; j < tokens.cols(); ++j)
                ptokens(i, j) = tokens(perm[i], j);
        const Mat pout = encoder_forward(ew, ptokens);
        double worst = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = 0; j < out.cols(); ++j)
                worst = std::max(worst, std::abs(pout(i, j) - out(perm[i], j)));
        push(r, "encoder-permutation-equivariance", worst, 1e-9);
    }
    return r;
}

SuiteResult suite_tokens() {
    SuiteResult r;
    r.suite = "tokens";
    Rng rng(424242);

    const std::size_t grid_cases[][3] = {{56, 4, 196},   {112, 8, 196},  {224, 8, 784},
                                         {224, 16, 196}, {448, 16, 784}, {896, 16, 3136},
                                         {896, 64, 196}, {512, 8, 4096}, {128, 4, 1024}};
    double grid_dev = 0.0;
    std::string grid_detail;
    for (const auto& g : grid_cases) {
        const std::size_t side = tokens_per_side(g[0], g[1]);
        const std::size_t n = side * side;
        if (n != g[2]) {
            grid_dev = 1.0;
            grid_detail = "side " + std::to_string(g[0]) + " patch " +
                          std::to_string(g[1]) + " gave " + std::to_string(n);
        }
    }
    push(r, "token-count-grid", grid_dev, 0.0, grid_detail);

    // patchify equals the explicit flatten-and-multiply oracle.
    {
        const std::size_t c = 3, h = 16, w = 16, p = 4, d_out = 5;
        ImageCHW img;
        img.c = c;
        img.h = h;
        img.w = w;
        img.data = rng.normals(c * h * w);
        const Tensor4 kernel = random_kernel(d_out, c, p, rng);
        const std::vector<double> bias = rng.normals(d_out);
        const TokenSequence seq = patchify(img, kernel, bias);

        double worst = 0.0;
        const std::size_t gh = h / p, gw = w / p;
        for (std::size_t bi = 0; bi < gh; ++bi)
            for (std::size_t bj = 0; bj < gw; ++bj)
                for (std::size_t d = 0; d < d_out; ++d) {
                    double acc = bias[d];
                    for (std::size_t ch = 0; ch < c; ++ch)
                        for (std::size_t pi = 0; pi < p; ++pi)
                            for (std::size_t pj = 0; pj < p; ++pj)
                                acc += img.at(ch, bi * p + pi, bj * p + pj) *
                                       kernel(d, ch, pi, pj);
                    worst = std::max(worst,
                                     std::abs(acc - seq.tokens(bi * gw + bj, d)));
                }
        push(r, "patchify-oracle", worst, 1e-12);
    }

    // End-to-end: per-patch upsampled image + PI-upsampled kernel reproduce
    // the original tokens.
    {
        const std::size_t h = 16, w = 16, p = 4, pp = 8, d_out = 4;
        ImageCHW img;
        img.c = 1;
        img.h = h;
        img.w = w;
        img.data = rng.normals(h * w);
        const Tensor4 kernel = random_kernel(d_out, 1, p, rng);
        const std::vector<double> bias(d_out, 0.0);
        const TokenSequence base = patchify(img, kernel, bias);

        Mat plane(h, w, img.data);
        const Mat rplane = resize_blocks(plane, p, pp);
        ImageCHW rimg;
        rimg.c = 1;
        rimg.h = rplane.rows();
        rimg.w = rplane.cols();
        rimg.data = rplane.data();
        const TokenSequence up = patchify(rimg, pi_resize_kernel(kernel, pp), bias);

        push(r, "per-patch-resize-recovery 4->8",
             max_abs_diff(base.tokens, up.tokens), 1e-9);
    }

    // Linearity of patchify in the image.
    {
        const std::size_t h = 8, w = 8, p = 4, d_out = 3;
        const Tensor4 kernel = random_kernel(d_out, 1, p, rng);
        const std::vector<double> bias = rng.normals(d_out);
        ImageCHW x, y;
        x.c = y.c = 1;
        x.h = y.h = h;
        x.w = y.w = w;
        x.data = rng.normals(h * w);
        y.data = rng.normals(h * w);
        const double a = 1.25, b = -0.5;
        ImageCHW mix = x;
        for (std::size_t i = 0; i < mix.data.size(); ++i)
            mix.data[i] = a * x.data[i] + b * y.data[i];
        const Mat tx = patchify(x, kernel, bias).tokens;
        const Mat ty = patchify(y, kernel, bias).tokens;
        const Mat tm = patchify(mix, kernel, bias).tokens;
        double worst = 0.0;
        for (std::size_t i = 0; i < tm.rows(); ++i)
            for (std::size_t j = 0; j < tm.cols(); ++j) {
                const double expect =
                    a * tx(i, j) + b * ty(i, j) - (a + b - 1.0) * bias[j];
                worst = std::max(worst, std::abs(tm(i, j) - expect));
            }
        push(r, "patchify-linearity", worst, 1e-12);
    }
    return r;
}

} // namespace

SuiteResult run_suite(const std::string& name) {
    if (name == "pinv") return suite_pinv();
    if (name == "recovery") return suite_recovery();
    if (name == "equivariance") return suite_equivariance();
    if (name == "tokens") return suite_tokens();
    throw ConfigError("unknown suite '" + name + "' (expected pinv, recovery, "
                      "equivariance, or tokens)");
}

} // namespace fleximo
