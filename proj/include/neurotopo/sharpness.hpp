#ifndef NEUROTOPO_SHARPNESS_HPP
#define NEUROTOPO_SHARPNESS_HPP

#include <cstdint>
#include <vector>

#include "neurotopo/rules.hpp"

namespace neurotopo {

/// Largest Hessian eigenvalue estimate and the derived critical step size.
struct SharpnessEstimate {
    double k_hat = 0.0;      // top |eigenvalue| of the loss Hessian
    double eta_star = 0.0;   // 1 / k_hat (infinity when k_hat == 0)
    std::size_t iterations_used = 0;
    double residual = 0.0;   // ||H v - rho v|| at the returned eigenpair
    bool converged = false;
};

/// Matrix-free Hessian action H v by central differences of the gradient:
/// (grad L(x + h v_hat) - grad L(x - h v_hat)) * ||v|| / (2 h).
/// `fd_step` <= 0 selects the default h = 1e-4 * (1 + ||x||).
std::vector<double> hvp(const GradientOracle& oracle, const ParticleCollection& x,
                        const std::vector<double>& v, double fd_step = 0.0);

/// Rayleigh-quotient power iteration on the Hessian; converges to the
/// dominant-|eigenvalue| pair, so k_hat reflects negative curvature too.
/// Deterministic given the seed. Non-convergence returns the best estimate
/// with converged = false.
SharpnessEstimate power_iteration(const GradientOracle& oracle,
                                  const ParticleCollection& x,
                                  std::size_t max_iters = 200, double tol = 1e-4,
                                  std::uint64_t seed = 0, double fd_step = 0.0);

struct LossDecrease {
    double eta = 0.0;
    double decrease = 0.0;  // L(x) - L(x - eta grad L(x))
    bool finite = true;     // false when the trial point exploded
};

/// Exact one-step loss decrease of gradient descent for each trial step size.
std::vector<LossDecrease> one_step_loss_decrease(const GradientOracle& oracle,
                                                 const ParticleCollection& x,
                                                 const std::vector<double>& etas);

} // namespace neurotopo

#endif
