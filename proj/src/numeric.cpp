#include "neurotopo/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace neurotopo {
namespace numeric {

std::vector<double> symmetric_eigenvalues(Matrix a, int max_sweeps, double tol) {
    if (a.rows != a.cols) throw DimensionError("symmetric_eigenvalues: matrix not square");
    const std::size_t n = a.rows;
    if (n == 0) return {};

    // Symmetrize first so finite-difference Hessians are handled gracefully.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = m;
            a(j, i) = m;
        }

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) return std::vector<double>(n, 0.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= tol * scale * static_cast<double>(n)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * scale) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end(),
              [](double x, double y) { return std::abs(x) > std::abs(y); });
    return eig;
}

std::vector<double> singular_values(const Matrix& a) {
    // Eigenvalues of A^T A; fine for the small Jacobians this is used on.
    Matrix ata(a.cols, a.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows; ++k) s += a(k, i) * a(k, j);
            ata(i, j) = s;
        }
    auto eig = symmetric_eigenvalues(std::move(ata));
    std::vector<double> sv(eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i) sv[i] = std::sqrt(std::max(0.0, eig[i]));
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

} // namespace numeric
} // namespace neurotopo
