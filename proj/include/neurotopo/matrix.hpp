#ifndef NEUROTOPO_MATRIX_HPP
#define NEUROTOPO_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "neurotopo/errors.hpp"

namespace neurotopo {

/// Minimal dense row-major matrix of doubles. Used for datasets, Hessians and
/// Jacobians; no linear algebra beyond what the library needs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
};

namespace numeric {

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
/// Returns the eigenvalues in descending order of absolute value.
std::vector<double> symmetric_eigenvalues(Matrix a, int max_sweeps = 64,
                                          double tol = 1e-14);

/// Singular values of a (small, dense) matrix via the eigenvalues of A^T A.
std::vector<double> singular_values(const Matrix& a);

/// Numerically stable logistic sigmoid.
inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

} // namespace numeric
} // namespace neurotopo

#endif
