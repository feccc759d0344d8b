#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "graf/kernels.hpp"

namespace graf {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. Rows are contiguous so a row can be
/// handed to the kernels as a span.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }

    void fill(double v) noexcept {
        for (double& x : data_) x = v;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// y = A x
inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.cols() || y.size() != a.rows()) throw std::invalid_argument("matvec: shape mismatch");
    kernels::active().gemv(a.flat().data(), a.rows(), a.cols(), x.data(), y.data());
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
    Vector y(a.rows());
    matvec(a, x, y);
    return y;
}

// x += A^T g
inline void matvec_t_acc(const Matrix& a, std::span<const double> g, std::span<double> x) {
    if (g.size() != a.rows() || x.size() != a.cols()) throw std::invalid_argument("matvec_t_acc: shape mismatch");
    for (std::size_t r = 0; r < a.rows(); ++r) {
        if (g[r] != 0.0) kernels::axpy(g[r], a.row(r), x);
    }
}

// A += g x^T
inline void outer_acc(std::span<const double> g, std::span<const double> x, Matrix& a) {
    if (g.size() != a.rows() || x.size() != a.cols()) throw std::invalid_argument("outer_acc: shape mismatch");
    for (std::size_t r = 0; r < a.rows(); ++r) {
        if (g[r] != 0.0) kernels::axpy(g[r], x, a.row(r));
    }
}

// Rows of X transformed by W: out.row(i) = W X.row(i)
inline Matrix transform_rows(const Matrix& w, const Matrix& x) {
    if (x.cols() != w.cols()) throw std::invalid_argument("transform_rows: shape mismatch");
    Matrix out(x.rows(), w.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) matvec(w, x.row(i), out.row(i));
    return out;
}

inline double norm2(std::span<const double> x) noexcept { return kernels::dot(x, x); }

}  // namespace graf
