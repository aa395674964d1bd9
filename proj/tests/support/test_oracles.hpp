// Test-only instruments: closed-form quadratic losses, finite-difference
// derivative oracles and a dense Hessian eigenvalue path. These stay
// independent of the library's matrix-free estimators on purpose.
#ifndef NEUROTOPO_TEST_ORACLES_HPP
#define NEUROTOPO_TEST_ORACLES_HPP

#include <cmath>
#include <vector>

#include "neurotopo/matrix.hpp"
#include "neurotopo/rng.hpp"
#include "neurotopo/rules.hpp"

namespace neurotopo::testing {

/// L(X) = 1/2 sum_i x_i^T A x_i with one symmetric A shared by all particles.
/// Gradient row i is A x_i; the collection Hessian is block-diagonal with
/// eigenvalues exactly those of A.
inline GradientOracle quadratic_oracle(Matrix a) {
    const std::size_t d = a.rows;
    return GradientOracle(d, [a = std::move(a), d](const ParticleCollection& x) {
        GradientEval eval;
        eval.grad = ParticleCollection(x.count(), d);
        for (std::size_t i = 0; i < x.count(); ++i) {
            for (std::size_t r = 0; r < d; ++r) {
                double g = 0.0;
                for (std::size_t c = 0; c < d; ++c) g += a(r, c) * x(i, c);
                eval.grad(i, r) = g;
                eval.loss += 0.5 * g * x(i, r);
            }
        }
        return eval;
    });
}

inline GradientOracle diagonal_quadratic_oracle(std::vector<double> lambda) {
    Matrix a(lambda.size(), lambda.size());
    for (std::size_t k = 0; k < lambda.size(); ++k) a(k, k) = lambda[k];
    return quadratic_oracle(std::move(a));
}

/// Central finite difference of the loss along one coordinate.
inline double fd_loss_derivative(const GradientOracle& oracle,
                                 const ParticleCollection& x, std::size_t i,
                                 std::size_t k, double h) {
    ParticleCollection plus = x;
    plus(i, k) += h;
    ParticleCollection minus = x;
    minus(i, k) -= h;
    return (oracle(plus).loss - oracle(minus).loss) / (2.0 * h);
}

/// Dense finite-difference Hessian: columns are central differences of the
/// gradient. Used with symmetric_eigenvalues as the sharpness test oracle.
inline Matrix dense_fd_hessian(const GradientOracle& oracle, const ParticleCollection& x,
                               double h) {
    const std::size_t dim = x.data().size();
    const std::size_t d = x.dim();
    Matrix hess(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        ParticleCollection plus = x;
        plus(col / d, col % d) += h;
        ParticleCollection minus = x;
        minus(col / d, col % d) -= h;
        const auto gp = oracle(plus).grad;
        const auto gm = oracle(minus).grad;
        for (std::size_t row = 0; row < dim; ++row)
            hess(row, col) = (gp.data()[row] - gm.data()[row]) / (2.0 * h);
    }
    return hess;
}

inline ParticleCollection random_collection(std::size_t n, std::size_t d,
                                            std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<double> data(n * d);
    for (auto& v : data) v = rng.normal(0.0, scale);
    return ParticleCollection(n, d, std::move(data));
}

} // namespace neurotopo::testing

#endif
