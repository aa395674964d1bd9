#include "neurotopo/rules.hpp"

#include <algorithm>
#include <cmath>

#include "neurotopo/rng.hpp"

namespace neurotopo {

GradientEval GradientOracle::operator()(const ParticleCollection& x) const {
    if (!fn_) throw PreconditionError("gradient oracle not initialized");
    if (x.dim() != dim_)
        throw DimensionError("gradient oracle: collection dim " + std::to_string(x.dim()) +
                             " != oracle dim " + std::to_string(dim_));
    GradientEval eval = fn_(x);
    if (!std::isfinite(eval.loss)) throw NumericError("non-finite loss value");
    if (eval.grad.dim() != x.dim() || eval.grad.count() != x.count())
        throw DimensionError("gradient oracle: gradient shape != input shape");
    const auto& g = eval.grad.data();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!std::isfinite(g[k]))
            throw NumericError("non-finite gradient at particle " +
                               std::to_string(k / x.dim()));
    }
    return eval;
}

MomentumPackedCollection::MomentumPackedCollection(ParticleCollection packed,
                                                   double mu_coeff)
    : base(std::move(packed)), mu(mu_coeff) {
    if (base.dim() % 2 != 0)
        throw DimensionError("momentum packing: row width must be 2*D_theta");
    if (mu < 0.0 || mu >= 1.0)
        throw PreconditionError("momentum coefficient must lie in [0, 1)");
}

ParticleCollection MomentumPackedCollection::theta() const {
    const std::size_t d = theta_dim();
    ParticleCollection out(base.count(), d);
    for (std::size_t i = 0; i < base.count(); ++i)
        for (std::size_t k = 0; k < d; ++k) out(i, k) = base(i, k);
    return out;
}

AdamPackedCollection::AdamPackedCollection(ParticleCollection packed, double b1,
                                           double b2, double eps, std::int64_t step_index)
    : base(std::move(packed)), beta1(b1), beta2(b2), epsilon(eps), t(step_index) {
    if (base.dim() % 3 != 0)
        throw DimensionError("adam packing: row width must be 3*D_theta");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw PreconditionError("adam decay rates must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw PreconditionError("adam epsilon must be positive");
    if (t < 1) throw PreconditionError("adam step counter must be >= 1");
    const std::size_t d = theta_dim();
    for (std::size_t i = 0; i < base.count(); ++i)
        for (std::size_t k = 0; k < d; ++k)
            if (base(i, 2 * d + k) < 0.0)
                throw PreconditionError("adam second moment has a negative entry at particle " +
                                        std::to_string(i));
}

ParticleCollection AdamPackedCollection::theta() const {
    const std::size_t d = theta_dim();
    ParticleCollection out(base.count(), d);
    for (std::size_t i = 0; i < base.count(); ++i)
        for (std::size_t k = 0; k < d; ++k) out(i, k) = base(i, k);
    return out;
}

ParticleCollection gd_update(const GradientOracle& oracle, const ParticleCollection& x) {
    GradientEval eval = oracle(x);
    auto& g = eval.grad.data();
    for (auto& v : g) v = -v;
    return std::move(eval.grad);
}

ParticleCollection momentum_update(const GradientOracle& oracle,
                                   const MomentumPackedCollection& x, StepSize eta) {
    const std::size_t d = x.theta_dim();
    const ParticleCollection theta = x.theta();
    GradientEval eval = oracle(theta);
    ParticleCollection u(x.base.count(), x.base.dim());
    const double inv_eta = 1.0 / eta.value();
    for (std::size_t i = 0; i < x.base.count(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double p = x.base(i, d + k);
            const double g = eval.grad(i, k);
            u(i, k) = -(x.mu * p + g);
            u(i, d + k) = ((x.mu - 1.0) * p + g) * inv_eta;
        }
    }
    return u;
}

ParticleCollection adam_update(const GradientOracle& oracle,
                               const AdamPackedCollection& x, StepSize eta,
                               AdamOrdering ordering) {
    const std::size_t d = x.theta_dim();
    for (std::size_t i = 0; i < x.base.count(); ++i)
        for (std::size_t k = 0; k < d; ++k)
            if (x.base(i, 2 * d + k) < 0.0)
                throw PreconditionError("adam second moment has a negative entry at particle " +
                                        std::to_string(i));

    const ParticleCollection theta = x.theta();
    GradientEval eval = oracle(theta);

    const double bias1 = 1.0 - std::pow(x.beta1, static_cast<double>(x.t));
    const double bias2 = 1.0 - std::pow(x.beta2, static_cast<double>(x.t));
    const double inv_eta = 1.0 / eta.value();

    ParticleCollection u(x.base.count(), x.base.dim());
    for (std::size_t i = 0; i < x.base.count(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double m = x.base(i, d + k);
            const double v = x.base(i, 2 * d + k);
            const double g = eval.grad(i, k);
            double m_eff = m;
            double v_eff = v;
            if (ordering == AdamOrdering::standard) {
                m_eff = x.beta1 * m + (1.0 - x.beta1) * g;
                v_eff = x.beta2 * v + (1.0 - x.beta2) * g * g;
            }
            u(i, k) = -(m_eff / bias1) / (x.epsilon + std::sqrt(v_eff / bias2));
            u(i, d + k) = (1.0 - x.beta1) * (g - m) * inv_eta;
            u(i, 2 * d + k) = (1.0 - x.beta2) * (g * g - v) * inv_eta;
        }
    }
    return u;
}

namespace {

Permutation random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> mapping(n);
    for (std::size_t i = 0; i < n; ++i) mapping[i] = i;
    rng.shuffle(mapping);
    return Permutation(std::move(mapping));
}

} // namespace

EquivarianceReport check_equivariance(const UpdateRuleFn& rule,
                                      const ParticleCollection& x, std::size_t trials,
                                      std::uint64_t seed) {
    if (trials < 1) throw PreconditionError("check_equivariance: trials must be >= 1");
    Rng rng(seed);
    const ParticleCollection u = rule(x);
    EquivarianceReport report;
    report.trials = trials;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const Permutation p = random_permutation(x.count(), rng);
        const ParticleCollection u_of_px = rule(apply_permutation(p, x));
        const ParticleCollection p_of_ux = apply_permutation(p, u);
        report.max_deviation =
            std::max(report.max_deviation, max_abs_difference(u_of_px, p_of_ux));
    }
    return report;
}

double default_continuity_radius(const ParticleCollection& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.count(); ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < x.dim(); ++k) sq += x(i, k) * x(i, k);
        total += std::sqrt(sq);
    }
    return 1e-3 * (1.0 + total / static_cast<double>(x.count()));
}

ContinuityEstimate estimate_continuity(const UpdateRuleFn& rule,
                                       const ParticleCollection& x,
                                       std::size_t perturbations, double radius,
                                       std::uint64_t seed) {
    if (!(radius > 0.0))
        throw PreconditionError("estimate_continuity: radius must be positive");
    if (x.count() < 2)
        throw PreconditionError("estimate_continuity: need >= 2 particles");

    const std::size_t n = x.count();
    const std::size_t d = x.dim();
    const ParticleCollection u = rule(x);

    ContinuityEstimate est;
    est.degenerate = true;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dij = pair_distance(x, i, j);
            if (dij <= 0.0) continue;
            est.degenerate = false;
            const double duij = pair_distance(u, i, j);
            est.k_pairwise = std::max(est.k_pairwise, duij / dij);
        }
    }

    Rng rng(seed);
    for (std::size_t s = 0; s < perturbations; ++s) {
        // Perturb one or two particles, as in the pairwise derivations.
        const std::size_t i = static_cast<std::size_t>(rng.uniform_index(n));
        std::size_t j = i;
        const bool two = rng.uniform() < 0.5;
        if (two) {
            j = static_cast<std::size_t>(rng.uniform_index(n - 1));
            if (j >= i) ++j;
        }

        std::vector<double> delta(d * (two ? 2 : 1));
        double norm_sq = 0.0;
        for (auto& v : delta) {
            v = rng.normal();
            norm_sq += v * v;
        }
        if (norm_sq <= 0.0) continue;
        const double scale = radius / std::sqrt(norm_sq);
        for (auto& v : delta) v *= scale;

        ParticleCollection y = x;
        for (std::size_t k = 0; k < d; ++k) y(i, k) += delta[k] ;
        if (two)
            for (std::size_t k = 0; k < d; ++k) y(j, k) += delta[d + k];

        const ParticleCollection uy = rule(y);
        const double delta_norm = radius;
        est.k_perturb =
            std::max(est.k_perturb, collection_distance(uy, u) / delta_norm);

        double sup_entry = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = uy(p, k) - u(p, k);
                sq += diff * diff;
            }
            sup_entry = std::max(sup_entry, std::sqrt(sq));
        }
        est.k_sup_entry = std::max(est.k_sup_entry, 2.0 * sup_entry / delta_norm);
    }
    return est;
}

} // namespace neurotopo
