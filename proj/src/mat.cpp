#include "fleximo/mat.hpp"

#include <cmath>
#include <string>

namespace fleximo {

void ensure_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericalError(std::string(what) + " contains a non-finite value");
        }
    }
}

void ensure_finite(const Mat& m, const char* what) { ensure_finite(m.data(), what); }

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("Mat data length " + std::to_string(data_.size()) +
                             " does not equal rows*cols = " + std::to_string(rows_ * cols_));
    }
    ensure_finite(data_, "Mat");
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Tensor4::Tensor4(std::array<std::size_t, 4> dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
    const std::size_t expect = dims_[0] * dims_[1] * dims_[2] * dims_[3];
    if (data_.size() != expect) {
        throw DimensionError("Tensor4 data length " + std::to_string(data_.size()) +
                             " does not equal product of dims = " + std::to_string(expect));
    }
    ensure_finite(data_, "Tensor4");
}

Mat transpose(const Mat& m) {
    Mat t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

double max_abs(const Mat& m) {
    double r = 0.0;
    for (double v : m.data()) r = std::max(r, std::abs(v));
    return r;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shapes " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                             "x" + std::to_string(b.cols()));
    }
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        r = std::max(r, std::abs(a.data()[i] - b.data()[i]));
    return r;
}

} // namespace fleximo
