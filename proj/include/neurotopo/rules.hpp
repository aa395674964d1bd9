#ifndef NEUROTOPO_RULES_HPP
#define NEUROTOPO_RULES_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "neurotopo/particles.hpp"

namespace neurotopo {

/// Loss value and per-particle gradient at one collection.
struct GradientEval {
    double loss = 0.0;
    ParticleCollection grad;
};

/// Contract for a differentiable loss over particle collections: maps a
/// collection to its loss and the gradient rows d L / d x_i. Evaluation must
/// be pure; the oracle is shared by rules, sharpness and diagnostics.
class GradientOracle {
public:
    using EvalFn = std::function<GradientEval(const ParticleCollection&)>;

    GradientOracle() = default;
    GradientOracle(std::size_t dim, EvalFn fn) : dim_(dim), fn_(std::move(fn)) {}

    std::size_t dim() const { return dim_; }

    /// Evaluates loss and gradient; throws NumericError (with the offending
    /// particle index) on non-finite output and DimensionError on shape drift.
    GradientEval operator()(const ParticleCollection& x) const;

private:
    std::size_t dim_ = 0;
    EvalFn fn_;
};

/// Any full-collection update rule U(X), already closed over hyperparameters.
using UpdateRuleFn = std::function<ParticleCollection(const ParticleCollection&)>;

/// Particles packed as (theta_i, p_i) rows for stateless heavy-ball momentum.
struct MomentumPackedCollection {
    ParticleCollection base;
    double mu = 0.9;

    MomentumPackedCollection(ParticleCollection packed, double mu_coeff);
    std::size_t theta_dim() const { return base.dim() / 2; }
    ParticleCollection theta() const;
};

/// Particles packed as (theta_i, m_i, v_i) rows for stateless Adam.
struct AdamPackedCollection {
    ParticleCollection base;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t t = 1;

    AdamPackedCollection(ParticleCollection packed, double b1, double b2, double eps,
                         std::int64_t step_index);
    std::size_t theta_dim() const { return base.dim() / 3; }
    ParticleCollection theta() const;
};

/// Which moments feed the parameter movement: `paper` evaluates the packed
/// rule verbatim (theta moves by the pre-update moments), `standard` is the
/// textbook ordering where theta moves by the freshly updated moments.
enum class AdamOrdering { paper, standard };

/// U(X) = -grad L(X).
ParticleCollection gd_update(const GradientOracle& oracle, const ParticleCollection& x);

/// Packed heavy-ball update; one `step` with the same eta reproduces
/// p+ = mu p + grad, theta+ = theta - eta p+.
ParticleCollection momentum_update(const GradientOracle& oracle,
                                   const MomentumPackedCollection& x, StepSize eta);

/// Packed Adam update; one `step` with the same eta reproduces
/// m+ = beta1 m + (1-beta1) g and v+ = beta2 v + (1-beta2) g^2.
ParticleCollection adam_update(const GradientOracle& oracle,
                               const AdamPackedCollection& x, StepSize eta,
                               AdamOrdering ordering = AdamOrdering::paper);

struct EquivarianceReport {
    double max_deviation = 0.0;
    std::size_t trials = 0;
};

/// Draws random permutations P and reports max ||U(PX) - P U(X)||_inf.
EquivarianceReport check_equivariance(const UpdateRuleFn& rule,
                                      const ParticleCollection& x, std::size_t trials,
                                      std::uint64_t seed);

struct ContinuityEstimate {
    /// max over particle pairs of ||U_i - U_j|| / ||x_i - x_j||.
    double k_pairwise = 0.0;
    /// max over sampled perturbations of ||U(X+D) - U(X)|| / ||D||.
    double k_perturb = 0.0;
    /// max over the same samples of 2 sup_i ||U_i(X+D) - U_i(X)|| / ||D||.
    double k_sup_entry = 0.0;
    /// True when every particle pair coincides (pairwise term meaningless).
    bool degenerate = false;
};

/// Empirical lower bounds for the continuity constant of a rule. Sampled
/// perturbations touch at most two particles, matching how the bounds are
/// derived. Deterministic given the seed.
ContinuityEstimate estimate_continuity(const UpdateRuleFn& rule,
                                       const ParticleCollection& x,
                                       std::size_t perturbations, double radius,
                                       std::uint64_t seed);

/// Default perturbation radius: 1e-3 * (1 + mean particle norm).
double default_continuity_radius(const ParticleCollection& x);

} // namespace neurotopo

#endif
