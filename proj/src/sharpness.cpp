#include "neurotopo/sharpness.hpp"

#include <cmath>
#include <limits>

#include "neurotopo/rng.hpp"

namespace neurotopo {

namespace {

double norm(const std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

ParticleCollection displaced(const ParticleCollection& x, const std::vector<double>& dir,
                             double scale) {
    std::vector<double> data = x.data();
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += scale * dir[k];
    return ParticleCollection(x.count(), x.dim(), std::move(data));
}

} // namespace

std::vector<double> hvp(const GradientOracle& oracle, const ParticleCollection& x,
                        const std::vector<double>& v, double fd_step) {
    if (v.size() != x.data().size())
        throw DimensionError("hvp: direction length != collection size");
    const double vnorm = norm(v);
    if (!(vnorm > 0.0)) throw PreconditionError("hvp: direction must be nonzero");

    double h = fd_step;
    if (!(h > 0.0)) {
        double xnorm = norm(x.data());
        h = 1e-4 * (1.0 + xnorm);
    }

    std::vector<double> unit(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) unit[k] = v[k] / vnorm;

    const GradientEval plus = oracle(displaced(x, unit, h));
    const GradientEval minus = oracle(displaced(x, unit, -h));

    std::vector<double> out(v.size());
    const double scale = vnorm / (2.0 * h);
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = (plus.grad.data()[k] - minus.grad.data()[k]) * scale;
    return out;
}

SharpnessEstimate power_iteration(const GradientOracle& oracle,
                                  const ParticleCollection& x, std::size_t max_iters,
                                  double tol, std::uint64_t seed, double fd_step) {
    if (max_iters < 1) throw PreconditionError("power_iteration: max_iters must be >= 1");
    if (!(tol > 0.0)) throw PreconditionError("power_iteration: tol must be positive");

    const std::size_t dim = x.data().size();
    Rng rng(seed);
    std::vector<double> v(dim);
    for (auto& e : v) e = rng.normal();
    double vnorm = norm(v);
    for (auto& e : v) e /= vnorm;

    SharpnessEstimate est;
    double rho = 0.0;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        std::vector<double> w = hvp(oracle, x, v, fd_step);
        rho = dot(v, w);  // Rayleigh quotient; signed
        double res_sq = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double r = w[k] - rho * v[k];
            res_sq += r * r;
        }
        est.iterations_used = it;
        est.residual = std::sqrt(res_sq);
        est.k_hat = std::abs(rho);
        if (est.residual <= tol) {
            est.converged = true;
            break;
        }
        const double wnorm = norm(w);
        if (!(wnorm > 0.0)) {
            // Direction annihilated: (near-)zero Hessian along v.
            est.k_hat = 0.0;
            est.converged = true;
            break;
        }
        for (std::size_t k = 0; k < dim; ++k) v[k] = w[k] / wnorm;
    }

    est.eta_star = est.k_hat > 0.0 ? 1.0 / est.k_hat
                                   : std::numeric_limits<double>::infinity();
    return est;
}

std::vector<LossDecrease> one_step_loss_decrease(const GradientOracle& oracle,
                                                 const ParticleCollection& x,
                                                 const std::vector<double>& etas) {
    if (etas.empty()) throw PreconditionError("one_step_loss_decrease: empty grid");
    for (double e : etas)
        if (!(e > 0.0))
            throw PreconditionError("one_step_loss_decrease: step sizes must be positive");

    const GradientEval base = oracle(x);
    std::vector<LossDecrease> out;
    out.reserve(etas.size());
    for (double eta : etas) {
        LossDecrease entry;
        entry.eta = eta;
        try {
            const ParticleCollection trial =
                displaced(x, base.grad.data(), -eta);
            const GradientEval at_trial = oracle(trial);
            entry.decrease = base.loss - at_trial.loss;
        } catch (const NumericError&) {
            entry.finite = false;
            entry.decrease = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(entry);
    }
    return out;
}

} // namespace neurotopo
