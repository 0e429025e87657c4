#ifndef AISEL_NN_MATRIX_HPP
#define AISEL_NN_MATRIX_HPP

#include <Eigen/Dense>

#include <string>

#include "aisel/error.hpp"

namespace aisel::nn {

/// Dense row-major matrix of 64-bit reals. Batches are stored one example per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& where) {
    if (!m.allFinite()) {
        throw NumericError("non-finite value in " + where);
    }
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const std::string& where) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(where + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

} // namespace aisel::nn

#endif
