#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace surveyml {

// Dense row-major matrix of doubles. Deliberately minimal: the feature
// matrices here are small enough that plain contiguous storage is all we need.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    // Column-subset projection, preserving row order.
    Matrix select_cols(const std::vector<int>& idx) const {
        Matrix out(rows, idx.size());
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < idx.size(); ++j)
                out(r, j) = (*this)(r, static_cast<std::size_t>(idx[j]));
        return out;
    }

    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < cols; ++c) out(r, c) = (*this)(idx[r], c);
        return out;
    }

    bool operator==(const Matrix& other) const = default;
};

}  // namespace surveyml
