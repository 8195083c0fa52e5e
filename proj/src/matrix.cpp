#include "pdn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdn/errors.hpp"

namespace pdn {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw DomainError("from_rows: ragged rows");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void shape_error(const char* op, const Matrix& a, const Matrix& b) {
    throw DomainError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

void prepare(Matrix& out, std::size_t rows, std::size_t cols, bool accumulate) {
    if (accumulate) {
        if (out.rows() != rows || out.cols() != cols) throw DomainError("matmul: accumulator has wrong shape");
    } else if (out.rows() != rows || out.cols() != cols) {
        out = Matrix(rows, cols);
    } else {
        std::fill(out.values().begin(), out.values().end(), 0.0);
    }
}

}  // namespace

void matmul(const Matrix& lhs, const Matrix& rhs, Matrix& out, bool accumulate) {
    if (lhs.cols() != rhs.rows()) shape_error("matmul", lhs, rhs);
    prepare(out, lhs.rows(), rhs.cols(), accumulate);
    const std::size_t n = rhs.cols();
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        double* o = out.row(i).data();
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const double a = lhs(i, k);
            if (a == 0.0) continue;
            const double* b = rhs.row(k).data();
            for (std::size_t j = 0; j < n; ++j) o[j] += a * b[j];
        }
    }
}

void matmul_tn(const Matrix& lhs, const Matrix& rhs, Matrix& out, bool accumulate) {
    if (lhs.rows() != rhs.rows()) shape_error("matmul_tn", lhs, rhs);
    prepare(out, lhs.cols(), rhs.cols(), accumulate);
    const std::size_t n = rhs.cols();
    for (std::size_t s = 0; s < lhs.rows(); ++s) {
        const double* b = rhs.row(s).data();
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const double a = lhs(s, k);
            if (a == 0.0) continue;
            double* o = out.row(k).data();
            for (std::size_t j = 0; j < n; ++j) o[j] += a * b[j];
        }
    }
}

void matmul_nt(const Matrix& lhs, const Matrix& rhs, Matrix& out) {
    if (lhs.cols() != rhs.cols()) shape_error("matmul_nt", lhs, rhs);
    prepare(out, lhs.rows(), rhs.rows(), false);
    const std::size_t inner = lhs.cols();
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        const double* a = lhs.row(i).data();
        for (std::size_t j = 0; j < rhs.rows(); ++j) {
            const double* b = rhs.row(j).data();
            double sum = 0.0;
            for (std::size_t k = 0; k < inner; ++k) sum += a[k] * b[k];
            out(i, j) = sum;
        }
    }
}

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), source.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= source.rows()) throw DomainError("gather_rows: index out of range");
        const auto src = source.row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace pdn
