#include "neurotopo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neurotopo/matrix.hpp"
#include "neurotopo/rng.hpp"
#include "neurotopo/union_find.hpp"

namespace neurotopo {

double check_well_definedness(const UpdateRuleFn& rule, const ParticleCollection& x0,
                              std::size_t steps, StepSize eta) {
    // Locate a duplicated pair; duplicate particle 0 if there is none.
    std::size_t dup_i = 0, dup_j = 0;
    for (std::size_t i = 0; i < x0.count() && dup_i == dup_j; ++i)
        for (std::size_t j = i + 1; j < x0.count(); ++j)
            if (pair_distance(x0, i, j) == 0.0) {
                dup_i = i;
                dup_j = j;
                break;
            }

    ParticleCollection x = x0;
    if (dup_i == dup_j) {
        std::vector<double> data = x0.data();
        data.insert(data.end(), x0.row(0).begin(), x0.row(0).end());
        x = ParticleCollection(x0.count() + 1, x0.dim(), std::move(data));
        dup_i = 0;
        dup_j = x0.count();
    }

    double drift = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        x = step(x, rule(x), eta);
        drift = std::max(drift, pair_distance(x, dup_i, dup_j));
    }
    return drift;
}

MergeSplitReport check_no_merge_split(const UpdateRuleFn& rule,
                                      const Trajectory& trajectory, StepSize eta,
                                      const std::vector<double>& k_per_step) {
    if (trajectory.size() < 2)
        throw PreconditionError("check_no_merge_split: trajectory needs >= 2 steps");
    if (k_per_step.size() + 1 < trajectory.size())
        throw PreconditionError("check_no_merge_split: need one k per transition");

    MergeSplitReport report;
    const double e = eta.value();
    for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
        const ParticleCollection& cur = trajectory[t];
        const ParticleCollection& nxt = trajectory[t + 1];
        const ParticleCollection u = rule(cur);
        const double k = k_per_step[t];
        const double band = e * k;
        const double tol = 1e-9 + 1e-6 * band;

        for (std::size_t i = 0; i < cur.count(); ++i) {
            for (std::size_t j = i + 1; j < cur.count(); ++j) {
                const double d = pair_distance(cur, i, j);
                if (d <= 0.0) continue;
                const double dn = pair_distance(nxt, i, j);
                const double r = dn / d;
                report.min_ratio = std::min(report.min_ratio, r);
                report.max_ratio = std::max(report.max_ratio, r);

                const double du = pair_distance(u, i, j);
                report.max_identity_violation =
                    std::max(report.max_identity_violation,
                             std::abs(r - 1.0) * d - e * du);

                const double lo = 1.0 - band - tol;
                const double hi = 1.0 + band + tol;
                const double excess = std::max(lo - r, r - hi);
                report.max_excess = std::max(report.max_excess, excess);
                if (excess > 0.0)
                    report.violations.push_back({t, i, j, r, lo, hi});
            }
        }
        ++report.steps_checked;
    }
    return report;
}

TrajectoryCheckReport check_injectivity(const Trajectory& trajectory, double merge_tol) {
    if (trajectory.empty())
        throw PreconditionError("check_injectivity: empty trajectory");
    const ParticleCollection& x0 = trajectory.front();
    const std::size_t n = x0.count();

    if (merge_tol <= 0.0) {
        double diameter = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                diameter = std::max(diameter, pair_distance(x0, i, j));
        merge_tol = 1e-7 * diameter;
        if (merge_tol <= 0.0) merge_tol = 1e-12;
    }

    TrajectoryCheckReport report;
    report.steps_checked = trajectory.size();

    // Pair state machine with 10x hysteresis: "apart" (has exceeded
    // 10*merge_tol) -> merge event when it drops below merge_tol; "merged" ->
    // split event if it climbs back above 10*merge_tol.
    enum class State : unsigned char { fresh, apart, merged };
    std::vector<State> state(n * n, State::fresh);

    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        const ParticleCollection& x = trajectory[t];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = pair_distance(x, i, j);
                State& s = state[i * n + j];
                switch (s) {
                    case State::fresh:
                        if (d > 10.0 * merge_tol) s = State::apart;
                        else if (d < merge_tol) s = State::merged;
                        break;
                    case State::apart:
                        if (d < merge_tol) {
                            report.merge_events.push_back({t, i, j, d});
                            s = State::merged;
                        }
                        break;
                    case State::merged:
                        if (d > 10.0 * merge_tol) {
                            report.split_events.push_back({t, i, j, d});
                            s = State::apart;
                        }
                        break;
                }
            }
        }
    }
    return report;
}

std::pair<double, double> check_jacobian_svs(const UpdateRuleFn& rule,
                                             const ParticleCollection& x, StepSize eta,
                                             double k_hat, std::size_t samples,
                                             std::uint64_t seed) {
    if (!(eta.value() * k_hat < 1.0))
        throw PreconditionError(
            "check_jacobian_svs: requires eta * k_hat < 1 (bound not claimed otherwise)");
    if (samples < 1) throw PreconditionError("check_jacobian_svs: samples must be >= 1");

    const std::size_t n = x.count();
    const std::size_t d = x.dim();
    const double e = eta.value();

    // Scale-aware finite-difference step for the one-particle map.
    double xnorm = 0.0;
    for (double v : x.data()) xnorm += v * v;
    const double h = 1e-5 * (1.0 + std::sqrt(xnorm) / std::sqrt(static_cast<double>(n)));

    Rng rng(seed);
    double sv_min = std::numeric_limits<double>::infinity();
    double sv_max = 0.0;
    for (std::size_t s = 0; s < std::min(samples, n); ++s) {
        const std::size_t i =
            samples >= n ? s : static_cast<std::size_t>(rng.uniform_index(n));
        Matrix jac(d, d);
        for (std::size_t col = 0; col < d; ++col) {
            ParticleCollection plus = x;
            plus(i, col) += h;
            ParticleCollection minus = x;
            minus(i, col) -= h;
            const ParticleCollection u_plus = rule(plus);
            const ParticleCollection u_minus = rule(minus);
            for (std::size_t row = 0; row < d; ++row) {
                const double dphi = (plus(i, row) + e * u_plus(i, row)) -
                                    (minus(i, row) + e * u_minus(i, row));
                jac(row, col) = dphi / (2.0 * h);
            }
        }
        const auto svs = numeric::singular_values(jac);
        for (double sv : svs) {
            sv_min = std::min(sv_min, sv);
            sv_max = std::max(sv_max, sv);
        }
    }
    return {sv_min, sv_max};
}

std::vector<std::int64_t> multiplicity_histogram(const ParticleCollection& x, double tol) {
    const std::size_t n = x.count();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (pair_distance(x, i, j) <= tol) uf.unite(i, j);

    std::vector<std::int64_t> class_mult(n, 0);
    for (std::size_t i = 0; i < n; ++i) class_mult[uf.find(i)] += x.multiplicity(i);
    std::vector<std::int64_t> histogram;
    for (std::size_t i = 0; i < n; ++i)
        if (class_mult[i] > 0) histogram.push_back(class_mult[i]);
    std::sort(histogram.begin(), histogram.end());
    return histogram;
}

MeasureReport check_measure_preservation(const Trajectory& trajectory,
                                         const std::vector<double>& eta_k_series) {
    if (trajectory.empty())
        throw PreconditionError("check_measure_preservation: empty trajectory");
    if (!trajectory.front().has_multiplicity())
        throw PreconditionError(
            "check_measure_preservation: initial collection needs a multiplicity vector");
    if (eta_k_series.size() + 1 < trajectory.size())
        throw PreconditionError("check_measure_preservation: need eta*k per transition");

    MeasureReport report;
    auto prev_hist = multiplicity_histogram(trajectory.front());
    for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
        const auto hist = multiplicity_histogram(trajectory[t + 1]);
        ++report.steps_checked;
        if (eta_k_series[t] < 1.0 && hist != prev_hist) {
            report.ok = false;
            report.first_failing_step = t + 1;
            return report;
        }
        prev_hist = hist;
    }
    return report;
}

} // namespace neurotopo
