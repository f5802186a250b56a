#include "fleximo/transformer.hpp"

#include "fleximo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fleximo {

namespace {
std::string shape_str(const Mat& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
} // namespace

Mat attention(const Mat& q, const Mat& k, const Mat& v, std::size_t d_k,
              double* rowsum_dev) {
    if (q.cols() != d_k || k.cols() != d_k) {
        throw DimensionError("attention: q " + shape_str(q) + " and k " + shape_str(k) +
                             " must both have d_k = " + std::to_string(d_k) + " columns");
    }
    if (k.rows() != v.rows()) {
        throw DimensionError("attention: k " + shape_str(k) + " and v " + shape_str(v) +
                             " must have matching row counts");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));
    const std::size_t n = q.rows(), m = k.rows();

    Mat out(n, v.cols());
    std::vector<double> logits(m);
    double max_dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < d_k; ++t) dot += q(i, t) * k(j, t);
            logits[j] = dot * scale;
            row_max = std::max(row_max, logits[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            logits[j] = std::exp(logits[j] - row_max);
            denom += logits[j];
        }
        double rowsum = 0.0;
        double* oi = out.row_ptr(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double w = logits[j] / denom;
            rowsum += w;
            const double* vj = v.row_ptr(j);
            for (std::size_t c = 0; c < v.cols(); ++c) oi[c] += w * vj[c];
        }
        max_dev = std::max(max_dev, std::abs(rowsum - 1.0));
    }
    if (rowsum_dev) *rowsum_dev = max_dev;
    return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475244)); }

Mat gelu(const Mat& x) {
    Mat y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = gelu(x.data()[i]);
    return y;
}

Mat linear(const Mat& x, const Mat& w, const std::vector<double>& b) {
    if (x.cols() != w.rows()) {
        throw DimensionError("linear: input width " + std::to_string(x.cols()) +
                             " does not match weight rows " + std::to_string(w.rows()));
    }
    if (b.size() != w.cols()) {
        throw DimensionError("linear: bias length " + std::to_string(b.size()) +
                             " does not match weight cols " + std::to_string(w.cols()));
    }
    Mat y(x.rows(), w.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double* yi = y.row_ptr(i);
        for (std::size_t j = 0; j < w.cols(); ++j) yi[j] = b[j];
        for (std::size_t t = 0; t < x.cols(); ++t) {
            const double xv = x(i, t);
            if (xv == 0.0) continue;
            const double* wt = w.row_ptr(t);
            for (std::size_t j = 0; j < w.cols(); ++j) yi[j] += xv * wt[j];
        }
    }
    return y;
}

Mat layer_norm(const Mat& x, const std::vector<double>& gamma,
               const std::vector<double>& beta, double eps) {
    if (gamma.size() != x.cols() || beta.size() != x.cols()) {
        throw DimensionError("layer_norm: affine parameter length does not match width " +
                             std::to_string(x.cols()));
    }
    Mat y(x.rows(), x.cols());
    const double inv_d = 1.0 / static_cast<double>(x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row_ptr(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) mean += xi[j];
        mean *= inv_d;
        double var = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double d = xi[j] - mean;
            var += d * d;
        }
        var *= inv_d;
        const double inv_std = 1.0 / std::sqrt(var + eps);
        double* yi = y.row_ptr(i);
        for (std::size_t j = 0; j < x.cols(); ++j)
            yi[j] = (xi[j] - mean) * inv_std * gamma[j] + beta[j];
    }
    return y;
}

BlockWeights init_block(std::size_t d, std::size_t hidden, Rng& rng,
                        const BlockInit& init) {
    auto weight = [&](std::size_t r, std::size_t c) {
        std::vector<double> v = rng.normals(r * c);
        for (double& x : v) x *= init.weight_std;
        return Mat(r, c, std::move(v));
    };
    auto bias = [&](std::size_t n) {
        if (init.zero_bias) return std::vector<double>(n, 0.0);
        std::vector<double> v = rng.normals(n);
        for (double& x : v) x *= init.weight_std;
        return v;
    };
    auto ln_pair = [&](std::vector<double>& g, std::vector<double>& b) {
        if (init.unit_layer_norm) {
            g.assign(d, 1.0);
            b.assign(d, 0.0);
        } else {
            g = bias(d);
            b = bias(d);
        }
    };
    BlockWeights w;
    w.w_q = weight(d, d);
    w.b_q = bias(d);
    w.w_k = weight(d, d);
    w.b_k = bias(d);
    w.w_v = weight(d, d);
    w.b_v = bias(d);
    w.w_o = weight(d, d);
    w.b_o = bias(d);
    ln_pair(w.ln1_g, w.ln1_b);
    w.w_fc1 = weight(d, hidden);
    w.b_fc1 = bias(hidden);
    w.w_fc2 = weight(hidden, d);
    w.b_fc2 = bias(d);
    ln_pair(w.ln2_g, w.ln2_b);
    return w;
}

Mat block_forward(const Mat& x, const BlockWeights& w, std::size_t heads,
                  double ln_eps, double* attn_rowsum_dev) {
    const std::size_t d = x.cols();
    if (heads == 0 || d % heads != 0) {
        throw ConfigError("block_forward: width " + std::to_string(d) +
                          " is not divisible by " + std::to_string(heads) + " heads");
    }
    const std::size_t d_k = d / heads;
    const std::size_t n = x.rows();

    const Mat normed = layer_norm(x, w.ln1_g, w.ln1_b, ln_eps);
    const Mat q = linear(normed, w.w_q, w.b_q);
    const Mat k = linear(normed, w.w_k, w.b_k);
    const Mat v = linear(normed, w.w_v, w.b_v);

    auto head_slice = [&](const Mat& m, std::size_t h) {
        Mat s(n, d_k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d_k; ++j) s(i, j) = m(i, h * d_k + j);
        return s;
    };

    Mat concat(n, d);
    double max_dev = 0.0;
    for (std::size_t h = 0; h < heads; ++h) {
        double dev = 0.0;
        const Mat oh = attention(head_slice(q, h), head_slice(k, h), head_slice(v, h),
                                 d_k, &dev);
        max_dev = std::max(max_dev, dev);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d_k; ++j) concat(i, h * d_k + j) = oh(i, j);
    }
    if (attn_rowsum_dev) *attn_rowsum_dev = max_dev;

    Mat y(n, d);
    const Mat proj = linear(concat, w.w_o, w.b_o);
    for (std::size_t i = 0; i < x.size(); ++i)
        y.data()[i] = x.data()[i] + proj.data()[i];

    const Mat normed2 = layer_norm(y, w.ln2_g, w.ln2_b, ln_eps);
    const Mat mlp = linear(gelu(linear(normed2, w.w_fc1, w.b_fc1)), w.w_fc2, w.b_fc2);
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += mlp.data()[i];
    return y;
}

} // namespace fleximo
