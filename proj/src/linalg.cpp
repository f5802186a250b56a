#include "fleximo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace fleximo {

namespace {

std::string shape_str(const Mat& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Dot product with four independent accumulators: keeps the reduction
// vectorizable without reassociation flags while staying deterministic.
double column_dot(const double* x, const double* y, std::size_t n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
        s0 += x[r] * y[r];
        s1 += x[r + 1] * y[r + 1];
        s2 += x[r + 2] * y[r + 2];
        s3 += x[r + 3] * y[r + 3];
    }
    for (; r < n; ++r) s0 += x[r] * y[r];
    return (s0 + s1) + (s2 + s3);
}

} // namespace

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a) +
                             " * " + shape_str(b));
    }
    Mat c(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            const double* bp = b.row_ptr(p);
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Svd svd(const Mat& m) {
    if (m.empty()) throw DimensionError("svd: empty matrix");

    // One-sided Jacobi works on a tall matrix; transpose a wide input and
    // swap the factors on the way out.
    const bool transposed = m.rows() < m.cols();
    const std::size_t n = transposed ? m.cols() : m.rows(); // working rows
    const std::size_t k = transposed ? m.rows() : m.cols(); // working cols

    // Column-major working copy: column j occupies a[j*n .. j*n+n).
    std::vector<double> a(n * k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t r = 0; r < n; ++r)
            a[j * n + r] = transposed ? m(j, r) : m(r, j);

    // Right-singular-vector accumulator, also column-major, starts as I.
    std::vector<double> v(k * k, 0.0);
    for (std::size_t j = 0; j < k; ++j) v[j * k + j] = 1.0;

    // Convergence threshold: |a_i . a_j| <= tol * ||a_i|| ||a_j||. Rotation
    // rounding reinjects correlation of order eps * norms, so the threshold
    // carries the customary sqrt(rows) factor to be reachable.
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = eps * std::sqrt(static_cast<double>(n));
    const int max_sweeps = 60;

    // Squared column norms are cached and updated analytically after each
    // rotation (alpha' = alpha - t*gamma, beta' = beta + t*gamma), then
    // recomputed exactly at the top of every sweep to stop drift.
    std::vector<double> sq(k);
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double s_max = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double* col = &a[j * n];
            sq[j] = column_dot(col, col, n);
            s_max = std::max(s_max, sq[j]);
        }
        // Columns whose norm has collapsed to the rounding floor are pure
        // noise (exact rank deficiency); orthogonalizing against them never
        // converges and their singular values are discarded by callers'
        // cutoffs, so they are frozen instead.
        const double dead = (static_cast<double>(n) * eps) *
                            (static_cast<double>(n) * eps) * s_max;
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                const double alpha = sq[i];
                const double beta = sq[j];
                if (alpha <= dead || beta <= dead) continue;
                double* ai = &a[i * n];
                double* aj = &a[j * n];
                const double gamma = column_dot(ai, aj, n);
                if (gamma == 0.0) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;

                // Rutishauser's stable rotation choice.
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t =
                    (zeta >= 0.0 ? 1.0 : -1.0) /
                    (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                for (std::size_t r = 0; r < n; ++r) {
                    const double x = ai[r], y = aj[r];
                    ai[r] = c * x - s * y;
                    aj[r] = s * x + c * y;
                }
                double* vi = &v[i * k];
                double* vj = &v[j * k];
                for (std::size_t r = 0; r < k; ++r) {
                    const double x = vi[r], y = vj[r];
                    vi[r] = c * x - s * y;
                    vj[r] = s * x + c * y;
                }
                sq[i] = std::max(alpha - t * gamma, 0.0);
                sq[j] = std::max(beta + t * gamma, 0.0);
            }
        }
        if (!rotated) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("svd: Jacobi rotations did not converge within 60 sweeps for " +
                             shape_str(m));
    }

    // Singular values are the column norms; normalized columns form U.
    std::vector<double> sigma(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double* col = &a[j * n];
        sigma[j] = std::sqrt(column_dot(col, col, n));
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Mat u_w(n, k), v_w(k, k);
    std::vector<double> sig_sorted(k);
    for (std::size_t jj = 0; jj < k; ++jj) {
        const std::size_t j = order[jj];
        sig_sorted[jj] = sigma[j];
        const double inv = sigma[j] > 0.0 ? 1.0 / sigma[j] : 0.0;
        for (std::size_t r = 0; r < n; ++r) u_w(r, jj) = a[j * n + r] * inv;
        for (std::size_t r = 0; r < k; ++r) v_w(r, jj) = v[j * k + r];
    }

    Svd out;
    out.sigma = std::move(sig_sorted);
    if (transposed) {
        out.u = std::move(v_w);
        out.v = std::move(u_w);
    } else {
        out.u = std::move(u_w);
        out.v = std::move(v_w);
    }
    return out;
}

Mat pinv(const Mat& m, double rel_tol) {
    if (m.empty()) throw DimensionError("pinv: empty matrix");
    if (rel_tol < 0.0) throw ConfigError("pinv: rel_tol must be positive");
    const Svd s = svd(m);
    const double tol =
        (rel_tol > 0.0 ? rel_tol
                       : static_cast<double>(std::max(m.rows(), m.cols())) *
                             std::numeric_limits<double>::epsilon()) *
        (s.sigma.empty() ? 0.0 : s.sigma[0]);

    // P = V * diag(1/sigma, zeroed below tol) * U^T.
    const std::size_t k = s.sigma.size();
    Mat w(m.cols(), k);
    for (std::size_t i = 0; i < m.cols(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            w(i, j) = s.sigma[j] > tol ? s.v(i, j) / s.sigma[j] : 0.0;
    return matmul(w, transpose(s.u));
}

Mat lstsq(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("lstsq: row counts disagree, " + shape_str(a) + " vs " +
                             shape_str(b));
    }
    const Svd s = svd(a);
    const double tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                       std::numeric_limits<double>::epsilon() *
                       (s.sigma.empty() ? 0.0 : s.sigma[0]);
    // X = V * diag(1/sigma) * U^T * b, dropping directions below tol for the
    // minimum-norm solution.
    Mat y = matmul(transpose(s.u), b);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        const double inv = s.sigma[i] > tol ? 1.0 / s.sigma[i] : 0.0;
        for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) *= inv;
    }
    return matmul(s.v, y);
}

} // namespace fleximo
