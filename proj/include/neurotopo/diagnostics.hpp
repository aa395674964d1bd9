#ifndef NEUROTOPO_DIAGNOSTICS_HPP
#define NEUROTOPO_DIAGNOSTICS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "neurotopo/rules.hpp"

namespace neurotopo {

/// Recorded sequence of particle collections (theta-clouds for packed rules).
using Trajectory = std::vector<ParticleCollection>;

struct MergeEvent {
    std::size_t step = 0;  // index into the trajectory where the pair fused
    std::size_t i = 0;
    std::size_t j = 0;
    double distance = 0.0;
};

/// Aggregate of all trajectory checks; consumed by the `check` CLI as JSON.
struct TrajectoryCheckReport {
    std::size_t steps_checked = 0;
    double max_equivariance_dev = 0.0;
    double max_pair_ratio_excess = 0.0;  // worst overshoot of the |1 +- eta k| band
    std::vector<MergeEvent> merge_events;
    std::vector<MergeEvent> split_events;
    double duplicate_drift = 0.0;
    bool multiplicity_histogram_ok = true;
    std::pair<double, double> jacobian_sv_range{1.0, 1.0};
};

/// Duplicated particles must follow identical orbits. Runs `steps` updates
/// from x0 (duplicating particle 0 first when no duplicate pair exists) and
/// returns the max distance the duplicated pair ever develops.
double check_well_definedness(const UpdateRuleFn& rule, const ParticleCollection& x0,
                              std::size_t steps, StepSize eta);

struct PairRatioViolation {
    std::size_t step = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    double ratio = 0.0;
    double bound_low = 0.0;
    double bound_high = 0.0;
};

struct MergeSplitReport {
    std::size_t steps_checked = 0;
    double min_ratio = 1.0;
    double max_ratio = 1.0;
    double max_excess = 0.0;  // worst signed overshoot outside the band
    /// Largest violation of |r-1| d <= eta ||U_i - U_j||; this identity holds
    /// for every rule regardless of continuity, so it is the backbone check.
    double max_identity_violation = 0.0;
    std::vector<PairRatioViolation> violations;
};

/// Checks the per-step bi-Lipschitz band r in [1 - eta k, 1 + eta k] for every
/// particle pair, with per-step continuity constants supplied by the caller.
/// The rule is re-evaluated along the trajectory for the triangle-inequality
/// identity.
MergeSplitReport check_no_merge_split(const UpdateRuleFn& rule,
                                      const Trajectory& trajectory, StepSize eta,
                                      const std::vector<double>& k_per_step);

/// Scans a trajectory for merges: a pair whose distance falls below merge_tol
/// after having exceeded 10 x merge_tol earlier. Also reports the reverse
/// (re-separation of a merged pair), which the theory forbids outright.
/// merge_tol <= 0 selects the default 1e-7 x initial diameter.
TrajectoryCheckReport check_injectivity(const Trajectory& trajectory,
                                        double merge_tol = 0.0);

/// Finite-difference Jacobian of the one-particle map y -> y + eta U_i(X | x_i = y)
/// for `samples` sampled particles; returns the (min, max) singular value seen.
/// Requires eta * k_hat < 1 (the regime where the band is claimed).
std::pair<double, double> check_jacobian_svs(const UpdateRuleFn& rule,
                                             const ParticleCollection& x, StepSize eta,
                                             double k_hat, std::size_t samples,
                                             std::uint64_t seed = 0);

struct MeasureReport {
    bool ok = true;
    std::size_t first_failing_step = 0;  // meaningful only when !ok
    std::size_t steps_checked = 0;
};

/// Measure-preservation bookkeeping: at each subcritical step (eta k < 1) the sorted
/// multiset of coincidence-class multiplicities must be unchanged. Classes are
/// particles within 1e-9 of each other (transitively).
MeasureReport check_measure_preservation(const Trajectory& trajectory,
                                         const std::vector<double>& eta_k_series);

/// Sorted coincidence-class multiplicities of one collection.
std::vector<std::int64_t> multiplicity_histogram(const ParticleCollection& x,
                                                 double tol = 1e-9);

} // namespace neurotopo

#endif
