#include "fleximo/diagnostics.hpp"

#include "fleximo/linalg.hpp"
#include "fleximo/resize.hpp"
#include "fleximo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace fleximo {

std::string strategy_tag(ResizeStrategy s) {
    return s == ResizeStrategy::PI ? "pi" : "linear";
}

ResizeStrategy strategy_from_tag(const std::string& tag) {
    if (tag == "pi") return ResizeStrategy::PI;
    if (tag == "linear") return ResizeStrategy::LINEAR;
    throw ConfigError("unknown resize strategy '" + tag + "' (expected pi or linear)");
}

FidelityReport token_fidelity(const Tensor4& k_old, ResizeStrategy strategy,
                              std::size_t dst_patch, std::size_t trials,
                              std::uint64_t seed) {
    if (trials == 0) throw ConfigError("token_fidelity requires trials >= 1");
    const std::size_t p = k_old.dim(2);
    if (k_old.dim(3) != p) {
        throw DimensionError("token_fidelity requires a square kernel");
    }
    const std::size_t slices = k_old.dim(0) * k_old.dim(1);
    const std::size_t in_px = p * p;
    const std::size_t out_px = dst_patch * dst_patch;

    const Tensor4 k_new = strategy == ResizeStrategy::PI
                              ? pi_resize_kernel(k_old, dst_patch)
                              : linear_resize_kernel(k_old, dst_patch);
    const ResizeOperator op = build_resize_matrix(p, p, dst_patch, dst_patch);

    FidelityReport rep;
    rep.strategy = strategy_tag(strategy);
    rep.src_patch = p;
    rep.dst_patch = dst_patch;
    rep.trials = trials;

    const Rng base(seed);
    double err_sum = 0.0, err_max = 0.0, loss_sum = 0.0;
    double ratio_sum = 0.0, ratio_sq_sum = 0.0;
    std::vector<double> resized(out_px);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng rng = base.split(trial);
        const std::vector<double> x = rng.normals(in_px);

        // Identity target keeps the resized patch bit-equal to the original.
        if (dst_patch == p) {
            std::copy(x.begin(), x.end(), resized.begin());
        } else {
            for (std::size_t r = 0; r < out_px; ++r) {
                const double* row = op.m.row_ptr(r);
                double acc = 0.0;
                for (std::size_t q = 0; q < in_px; ++q) acc += row[q] * x[q];
                resized[r] = acc;
            }
        }

        double norm_old = 0.0, norm_new = 0.0, loss = 0.0;
        for (std::size_t s = 0; s < slices; ++s) {
            const double* w_old = k_old.data().data() + s * in_px;
            const double* w_new = k_new.data().data() + s * out_px;
            double d_old = 0.0, d_new = 0.0;
            for (std::size_t q = 0; q < in_px; ++q) d_old += x[q] * w_old[q];
            for (std::size_t q = 0; q < out_px; ++q) d_new += resized[q] * w_new[q];
            const double err = std::abs(d_old - d_new);
            err_sum += err;
            err_max = std::max(err_max, err);
            loss += (d_old - d_new) * (d_old - d_new);
            norm_old += d_old * d_old;
            norm_new += d_new * d_new;
        }
        loss_sum += loss;
        const double ratio =
            norm_old > 0.0 ? std::sqrt(norm_new) / std::sqrt(norm_old) : 1.0;
        ratio_sum += ratio;
        ratio_sq_sum += ratio * ratio;
    }

    const double nt = static_cast<double>(trials);
    rep.mean_dot_err = err_sum / (nt * static_cast<double>(slices));
    rep.max_dot_err = err_max;
    rep.mc_loss = loss_sum / nt;
    rep.norm_ratio_mean = ratio_sum / nt;
    const double var = std::max(0.0, ratio_sq_sum / nt - rep.norm_ratio_mean * rep.norm_ratio_mean);
    rep.norm_ratio_std = std::sqrt(var);
    return rep;
}

namespace {

// Direct 1-D DFT of each row of a complex matrix stored as vectors.
void dft_rows(std::vector<std::complex<double>>& a, std::size_t rows, std::size_t cols) {
    std::vector<std::complex<double>> out(cols);
    const double step = -2.0 * 3.14159265358979323846 / static_cast<double>(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::complex<double>* row = a.data() + r * cols;
        for (std::size_t k = 0; k < cols; ++k) {
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t t = 0; t < cols; ++t) {
                const double ang = step * static_cast<double>((k * t) % cols);
                acc += row[t] * std::complex<double>(std::cos(ang), std::sin(ang));
            }
            out[k] = acc;
        }
        std::copy(out.begin(), out.end(), row);
    }
}

} // namespace

Mat dft2_magnitude_raw(const Mat& img) {
    if (img.empty()) throw DimensionError("dft2 requires a nonempty image");
    const std::size_t h = img.rows(), w = img.cols();
    std::vector<std::complex<double>> a(h * w);
    for (std::size_t i = 0; i < h * w; ++i) a[i] = img.data()[i];

    dft_rows(a, h, w); // transform each row
    // Transpose, transform (former) columns, transpose back implicitly by
    // indexing: work on a column-major copy.
    std::vector<std::complex<double>> t(h * w);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) t[j * h + i] = a[i * w + j];
    dft_rows(t, w, h);

    Mat out(h, w);
    const std::size_t sh = h / 2, sw = w / 2;
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
            // centered: out(sh, sw) holds the DC bin
            const std::size_t cu = (u + sh) % h, cv = (v + sw) % w;
            out(cu, cv) = std::abs(t[v * h + u]);
        }
    }
    return out;
}

Mat dft2_magnitude(const Mat& img) {
    Mat m = dft2_magnitude_raw(img);
    for (double& v : m.data()) v = std::log1p(v);
    return m;
}

Mat local_entropy(const Mat& img, std::size_t window, std::size_t bins) {
    if (window == 0 || window % 2 == 0) {
        throw ConfigError("entropy window must be odd and >= 1, got " +
                          std::to_string(window));
    }
    if (bins < 2) throw ConfigError("entropy needs bins >= 2");
    if (img.empty()) throw DimensionError("local_entropy requires a nonempty image");

    const std::size_t h = img.rows(), w = img.cols();
    Mat out(h, w);

    double lo = img.data()[0], hi = img.data()[0];
    for (double v : img.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) return out; // constant image: entropy identically zero

    // Precompute bin index per pixel (top value clamped into the last bin).
    const double scale = static_cast<double>(bins) / (hi - lo);
    std::vector<std::size_t> bin(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
        const std::size_t b = static_cast<std::size_t>((img.data()[i] - lo) * scale);
        bin[i] = std::min(b, bins - 1);
    }

    const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(window / 2);
    const double inv_count = 1.0 / static_cast<double>(window * window);
    std::vector<std::size_t> hist(bins);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            std::fill(hist.begin(), hist.end(), 0);
            for (std::ptrdiff_t di = -r; di <= r; ++di) {
                const std::size_t ii = static_cast<std::size_t>(std::clamp(
                    static_cast<std::ptrdiff_t>(i) + di, std::ptrdiff_t{0},
                    static_cast<std::ptrdiff_t>(h) - 1));
                for (std::ptrdiff_t dj = -r; dj <= r; ++dj) {
                    const std::size_t jj = static_cast<std::size_t>(std::clamp(
                        static_cast<std::ptrdiff_t>(j) + dj, std::ptrdiff_t{0},
                        static_cast<std::ptrdiff_t>(w) - 1));
                    ++hist[bin[ii * w + jj]];
                }
            }
            double e = 0.0;
            for (std::size_t b = 0; b < bins; ++b) {
                if (hist[b] == 0) continue;
                const double p = static_cast<double>(hist[b]) * inv_count;
                e -= p * std::log2(p);
            }
            out(i, j) = e;
        }
    }
    return out;
}

double PenroseResiduals::max() const {
    return std::max(std::max(reconstruct, weak_inverse),
                    std::max(mp_symmetry, pm_symmetry));
}

PenroseResiduals moore_penrose_residuals(const Mat& m, const Mat& m_pinv) {
    if (m.rows() != m_pinv.cols() || m.cols() != m_pinv.rows()) {
        throw DimensionError("pseudo-inverse shape " + std::to_string(m_pinv.rows()) +
                             "x" + std::to_string(m_pinv.cols()) +
                             " is not the transpose-compatible partner of " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const Mat mp = matmul(m, m_pinv); // rows x rows
    const Mat pm = matmul(m_pinv, m); // cols x cols

    PenroseResiduals r;
    r.reconstruct = max_abs_diff(matmul(mp, m), m);
    r.weak_inverse = max_abs_diff(matmul(pm, m_pinv), m_pinv);
    double sym = 0.0;
    for (std::size_t i = 0; i < mp.rows(); ++i)
        for (std::size_t j = i + 1; j < mp.cols(); ++j)
            sym = std::max(sym, std::abs(mp(i, j) - mp(j, i)));
    r.mp_symmetry = sym;
    sym = 0.0;
    for (std::size_t i = 0; i < pm.rows(); ++i)
        for (std::size_t j = i + 1; j < pm.cols(); ++j)
            sym = std::max(sym, std::abs(pm(i, j) - pm(j, i)));
    r.pm_symmetry = sym;
    return r;
}

} // namespace fleximo
