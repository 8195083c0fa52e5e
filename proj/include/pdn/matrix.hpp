#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pdn {

/// Dense row-major matrix of doubles. A batch is stored one sample per row.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(const Matrix&) = default;
    Matrix& operator=(const Matrix&) = default;
    // A moved-from matrix is left empty (0 x 0), never with stale dimensions.
    Matrix(Matrix&& other) noexcept
        : rows_(std::exchange(other.rows_, 0)), cols_(std::exchange(other.cols_, 0)), data_(std::move(other.data_)) {
        other.data_.clear();
    }
    Matrix& operator=(Matrix&& other) noexcept {
        rows_ = std::exchange(other.rows_, 0);
        cols_ = std::exchange(other.cols_, 0);
        data_ = std::move(other.data_);
        other.data_.clear();
        return *this;
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool all_finite() const noexcept;
    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// out = lhs * rhs (+ out when accumulate).
void matmul(const Matrix& lhs, const Matrix& rhs, Matrix& out, bool accumulate = false);
/// out = lhs^T * rhs.
void matmul_tn(const Matrix& lhs, const Matrix& rhs, Matrix& out, bool accumulate = false);
/// out = lhs * rhs^T.
void matmul_nt(const Matrix& lhs, const Matrix& rhs, Matrix& out);

/// Rows `indices` of `source`, in that order.
Matrix gather_rows(const Matrix& source, std::span<const std::size_t> indices);

}  // namespace pdn
