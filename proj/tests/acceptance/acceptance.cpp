// Acceptance suite: one numbered criterion per function, each printing a
// [PASS] / [FAIL] / [WARN] line with its runtime. Run with no arguments for
// the full suite or with criterion numbers to select a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "neurotopo/diagnostics.hpp"
#include "neurotopo/geometry.hpp"
#include "neurotopo/models.hpp"
#include "neurotopo/rng.hpp"
#include "neurotopo/rules.hpp"
#include "neurotopo/sharpness.hpp"
#include "neurotopo/topology.hpp"
#include "../support/test_oracles.hpp"

using namespace neurotopo;
using neurotopo::testing::dense_fd_hessian;
using neurotopo::testing::diagonal_quadratic_oracle;
using neurotopo::testing::random_collection;

namespace {

struct CriterionResult {
    bool pass = true;
    bool warn_only = false;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void warn(bool ok, const std::string& what) {
        if (!ok) {
            warn_only = true;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

/// Warm-started power iteration: a few Hessian actions per call, carrying the
/// eigenvector estimate across training steps so per-step tracking is cheap.
class SharpnessTracker {
public:
    explicit SharpnessTracker(std::size_t dim, std::uint64_t seed) : v_(dim) {
        Rng rng(seed);
        double norm = 0.0;
        for (auto& e : v_) {
            e = rng.normal();
            norm += e * e;
        }
        norm = std::sqrt(norm);
        for (auto& e : v_) e /= norm;
    }

    double update(const GradientOracle& oracle, const ParticleCollection& x,
                  std::size_t iters = 4) {
        double rho = 0.0;
        for (std::size_t it = 0; it < iters; ++it) {
            std::vector<double> w = hvp(oracle, x, v_);
            rho = 0.0;
            double wnorm = 0.0;
            for (std::size_t k = 0; k < v_.size(); ++k) {
                rho += v_[k] * w[k];
                wnorm += w[k] * w[k];
            }
            wnorm = std::sqrt(wnorm);
            if (!(wnorm > 0.0)) return 0.0;
            for (std::size_t k = 0; k < v_.size(); ++k) v_[k] = w[k] / wnorm;
        }
        return std::abs(rho);
    }

private:
    std::vector<double> v_;
};

ParticleCollection two_circle_init(std::size_t h, std::uint64_t seed) {
    ManifoldSpec spec;
    spec.kind = ManifoldKind::disjoint_circles;
    spec.n = h;
    spec.seed = seed;
    return sample(spec);
}

std::int64_t betti0_of(const ParticleCollection& cloud) {
    const auto dm = pairwise_distances(cloud);
    return betti_numbers(build_rips(dm, adaptive_scale(dm), 2)).b0;
}

// ---------------------------------------------------------------------------
// 1. Equivariance suite.
CriterionResult criterion_1() {
    CriterionResult r;
    const std::size_t d = 8, h = 32;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset data = generate_teacher_dataset(TeacherSpec::draw(6, d, 100 + seed),
                                                      64, d, 100 + seed, 1.0);
        Batch all(64);
        for (std::size_t i = 0; i < 64; ++i) all[i] = i;
        const GradientOracle oracle = make_loss_oracle(d, 1, data, all, "mse");
        const StepSize eta(0.01);

        const auto theta = random_collection(h, d + 1, 200 + seed);

        const UpdateRuleFn gd = [&](const ParticleCollection& x) {
            return gd_update(oracle, x);
        };
        worst = std::max(worst, check_equivariance(gd, theta, 20, seed).max_deviation);

        ParticleCollection packed2(h, 2 * (d + 1));
        ParticleCollection packed3(h, 3 * (d + 1));
        Rng rng(300 + seed);
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t k = 0; k < d + 1; ++k) {
                packed2(i, k) = packed3(i, k) = theta(i, k);
                packed2(i, d + 1 + k) = rng.normal();
                packed3(i, d + 1 + k) = rng.normal();
                packed3(i, 2 * (d + 1) + k) = std::abs(rng.normal());
            }
        }
        const UpdateRuleFn mom = [&](const ParticleCollection& x) {
            return momentum_update(oracle, MomentumPackedCollection(x, 0.9), eta);
        };
        worst = std::max(worst, check_equivariance(mom, packed2, 20, seed).max_deviation);

        const UpdateRuleFn adam = [&](const ParticleCollection& x) {
            return adam_update(oracle, AdamPackedCollection(x, 0.9, 0.999, 1e-8, 3), eta);
        };
        worst = std::max(worst, check_equivariance(adam, packed3, 20, seed).max_deviation);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max ||U(PX) - P U(X)||_inf = %.3g", worst);
    r.detail = buf;
    r.require(worst <= 1e-10, "deviation exceeds 1e-10");
    return r;
}

// 2. Duplicated-neuron drift.
CriterionResult criterion_2() {
    CriterionResult r;
    const std::size_t d = 2, h = 16;
    const Dataset data =
        generate_teacher_dataset(TeacherSpec::draw(4, d, 7), 64, d, 7, 1.0);
    Batch all(64);
    for (std::size_t i = 0; i < 64; ++i) all[i] = i;
    const GradientOracle oracle = make_loss_oracle(d, 1, data, all, "mse");
    const StepSize eta(0.05);

    const auto theta = random_collection(h, d + 1, 8);

    const UpdateRuleFn gd = [&](const ParticleCollection& x) {
        return gd_update(oracle, x);
    };
    const double gd_drift = check_well_definedness(gd, theta, 1000, eta);
    r.require(gd_drift == 0.0, "gd drift nonzero");

    ParticleCollection packed2(h, 2 * (d + 1));
    ParticleCollection packed3(h, 3 * (d + 1));
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t k = 0; k < d + 1; ++k)
            packed2(i, k) = packed3(i, k) = theta(i, k);
    const UpdateRuleFn mom = [&](const ParticleCollection& x) {
        return momentum_update(oracle, MomentumPackedCollection(x, 0.9), eta);
    };
    const double mom_drift = check_well_definedness(mom, packed2, 1000, eta);
    r.require(mom_drift == 0.0, "momentum drift nonzero");

    const UpdateRuleFn adam = [&](const ParticleCollection& x) {
        return adam_update(oracle, AdamPackedCollection(x, 0.9, 0.999, 1e-8, 1),
                           StepSize(0.001));
    };
    const double adam_drift = check_well_definedness(adam, packed3, 1000, StepSize(0.001));
    r.require(adam_drift <= 1e-12, "adam drift exceeds 1e-12");

    char buf[160];
    std::snprintf(buf, sizeof(buf), "drift gd=%.3g momentum=%.3g adam=%.3g", gd_drift,
                  mom_drift, adam_drift);
    r.detail = buf;
    return r;
}

// 3. Bi-Lipschitz pairwise band on quadratics.
CriterionResult criterion_3() {
    CriterionResult r;
    const double lambda = 4.0;
    const auto oracle = diagonal_quadratic_oracle({lambda, 1.0});
    const UpdateRuleFn gd = [&](const ParticleCollection& x) {
        return gd_update(oracle, x);
    };

    const StepSize eta(0.5 / lambda);
    ParticleCollection x = random_collection(10, 2, 9);
    Trajectory traj{x};
    for (int t = 0; t < 40; ++t) {
        x = step(x, gd(x), eta);
        traj.push_back(x);
    }
    const auto report =
        check_no_merge_split(gd, traj, eta, std::vector<double>(40, lambda));
    r.require(report.violations.empty(), "pairwise ratio left the bi-Lipschitz band");
    r.require(report.min_ratio >= 1.0 - eta.value() * lambda - 1e-9, "lower bound");
    r.require(report.max_ratio <= 1.0 + eta.value() * lambda + 1e-9, "upper bound");

    // Eigen-aligned pair at eta = 1/lambda merges in one step.
    const ParticleCollection aligned(2, 2, {1.0, 0.5, 2.0, 0.5});
    const auto merged = step(aligned, gd(aligned), StepSize(1.0 / lambda));
    const double merged_dist = pair_distance(merged, 0, 1);
    r.require(merged_dist <= 1e-12, "aligned pair failed to merge at eta = 1/K");

    char buf[160];
    std::snprintf(buf, sizeof(buf), "ratios in [%.6f, %.6f], merged pair distance %.3g",
                  report.min_ratio, report.max_ratio, merged_dist);
    r.detail = buf;
    return r;
}

// 4. Betti oracle equivalence.
CriterionResult criterion_4() {
    CriterionResult r;
    Rng rng(2025);
    std::size_t agreements = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(7);
        const std::size_t dim = 2 + rng.uniform_index(2);
        const auto cloud = random_collection(n, dim, 5000 + trial);
        const double scale = 0.2 + 2.3 * rng.uniform();
        const auto cx = build_rips(pairwise_distances(cloud), scale);
        if (betti_numbers(cx) == betti_oracle(cx)) ++agreements;
    }
    r.require(agreements == 500, "oracle disagreement on random clouds");

    const ParticleCollection octa(
        6, 3, {1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1});
    const auto b_octa = betti_numbers(build_rips(pairwise_distances(octa), 1.5));
    r.require(b_octa == BettiProfile{1, 0, 1, 0, 0}, "octahedron profile");

    const ParticleCollection square(4, 2, {0, 0, 1, 0, 1, 1, 0, 1});
    const auto b_square = betti_numbers(build_rips(pairwise_distances(square), 1.2));
    r.require(b_square == BettiProfile{1, 1, 0, 0, 0}, "square-cycle profile");

    const ParticleCollection isolated(3, 2, {0, 0, 9, 0, 0, 9});
    const auto b_iso = betti_numbers(build_rips(pairwise_distances(isolated), 1.0));
    r.require(b_iso == BettiProfile{3, 0, 0, 0, 0}, "isolated-points profile");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "500/500 random clouds agree; fixtures (1,0,1), (1,1,0), (3,0,0)");
    r.detail = buf;
    return r;
}

// 5. Sphere initialization profile.
CriterionResult criterion_5() {
    CriterionResult r;
    ManifoldSpec spec;
    spec.kind = ManifoldKind::sphere;
    spec.n = 1024;
    spec.seed = 42;
    const auto cloud = sample(spec);
    const auto dm = pairwise_distances(cloud);
    const auto betti = betti_numbers(build_rips(dm, adaptive_scale(dm), 3));
    char buf[96];
    std::snprintf(buf, sizeof(buf), "1024-point sphere at adaptive scale: (%lld,%lld,%lld)",
                  static_cast<long long>(betti.b0), static_cast<long long>(betti.b1),
                  static_cast<long long>(betti.b2));
    r.detail = buf;
    r.require(betti == BettiProfile{1, 0, 1, 0, 0}, "expected (1,0,1)");
    return r;
}

// Shared trainer for criteria 6, 10, 11: full-batch training with per-step
// sharpness tracking, Betti cadence and trajectory recording.
struct PhaseRun {
    Trajectory trajectory;           // theta-cloud per step (including step 0)
    std::vector<double> eta_k;       // eta * k_hat per transition
    std::vector<double> k_hat;       // per step
    std::vector<std::int64_t> b0_at; // b0 at each Betti measurement
    std::vector<std::size_t> betti_steps;
    std::vector<BettiProfile> betti_profiles;
    bool diverged = false;
};

PhaseRun phase_run(const GradientOracle& oracle, const std::string& rule_name,
                   ParticleCollection init, double eta, std::size_t steps,
                   std::size_t betti_every, std::uint64_t seed) {
    PhaseRun out;
    const std::size_t d_theta = init.dim();
    ParticleCollection packed = init;
    if (rule_name == "adam") {
        ParticleCollection p(init.count(), 3 * d_theta);
        for (std::size_t i = 0; i < init.count(); ++i)
            for (std::size_t k = 0; k < d_theta; ++k) p(i, k) = init(i, k);
        if (init.has_multiplicity()) p.set_multiplicity(init.multiplicity_vector());
        packed = std::move(p);
    }
    SharpnessTracker tracker(init.count() * d_theta, seed);
    std::int64_t adam_t = 1;

    const auto theta_of = [&](const ParticleCollection& x) {
        if (rule_name != "adam") return x;
        ParticleCollection theta(x.count(), d_theta);
        for (std::size_t i = 0; i < x.count(); ++i)
            for (std::size_t k = 0; k < d_theta; ++k) theta(i, k) = x(i, k);
        if (x.has_multiplicity()) theta.set_multiplicity(x.multiplicity_vector());
        return theta;
    };

    for (std::size_t t = 0; t <= steps; ++t) {
        const ParticleCollection theta = theta_of(packed);
        out.trajectory.push_back(theta);
        try {
            out.k_hat.push_back(tracker.update(oracle, theta));
        } catch (const NumericError&) {
            out.trajectory.pop_back();
            out.diverged = true;
            break;
        }
        if (t % betti_every == 0 || t == steps) {
            const auto dm = pairwise_distances(theta);
            const auto profile = betti_numbers(build_rips(dm, adaptive_scale(dm), 2));
            out.betti_steps.push_back(t);
            out.betti_profiles.push_back(profile);
            out.b0_at.push_back(profile.b0);
        }
        if (t == steps) break;
        out.eta_k.push_back(eta * out.k_hat.back());

        try {
            if (rule_name == "gd") {
                packed = step(packed, gd_update(oracle, packed), StepSize(eta));
            } else {
                const ParticleCollection u = adam_update(
                    oracle, AdamPackedCollection(packed, 0.9, 0.999, 1e-8, adam_t),
                    StepSize(eta));
                ++adam_t;
                packed = step(packed, u, StepSize(eta));
            }
        } catch (const NumericError&) {
            out.diverged = true;
            break;
        }
    }
    return out;
}

GradientOracle teacher_task_oracle(Dataset& data, std::size_t d, std::size_t n,
                                   std::uint64_t seed, std::size_t teacher_h = 8) {
    data = generate_teacher_dataset(TeacherSpec::draw(teacher_h, d, seed), n, d, seed,
                                    1.0);
    Batch all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return make_loss_oracle(d, 1, data, all, "mse");
}

// 6. Topological phase behavior on the two-circle initialization.
CriterionResult criterion_6() {
    CriterionResult r;
    Dataset data;
    const GradientOracle oracle = teacher_task_oracle(data, 1, 256, 11);
    const auto init = two_circle_init(64, 11);
    r.require(betti0_of(init) == 2, "initialization is not two components");

    const double k0 = power_iteration(oracle, init, 400, 1e-6, 11).k_hat;

    // Small step size: topology locked.
    {
        const double eta = 0.25 / k0;
        const PhaseRun run = phase_run(oracle, "gd", init, eta, 2000, 50, 21);
        r.require(!run.diverged, "small-eta run diverged");
        double max_ek = 0.0;
        for (double ek : run.eta_k) max_ek = std::max(max_ek, ek);
        r.require(max_ek < 0.7, "eta*k reached " + std::to_string(max_ek) +
                                    " (needs < 0.7 throughout)");
        for (std::size_t i = 0; i < run.b0_at.size(); ++i)
            if (run.b0_at[i] != 2)
                r.require(false, "b0 changed at step " +
                                     std::to_string(run.betti_steps[i]));
        const auto scan = check_injectivity(run.trajectory);
        r.require(scan.merge_events.empty(), "merge events in the subcritical run");
        char buf[128];
        std::snprintf(buf, sizeof(buf), "small eta: max eta*k = %.3f, b0 = 2 at %zu checks",
                      max_ek, run.b0_at.size());
        r.detail = buf;
    }

    // Large step size: supercritical steps and topological simplification.
    {
        const double eta = 2.5 / k0;
        const PhaseRun run = phase_run(oracle, "gd", init, eta, 2000, 50, 22);
        std::size_t consecutive = 0, best = 0;
        for (double ek : run.eta_k) {
            consecutive = ek > 1.0 ? consecutive + 1 : 0;
            best = std::max(best, consecutive);
        }
        r.require(best >= 10, "eta*k never exceeded 1 for 10 consecutive steps (best " +
                                  std::to_string(best) + ")");
        const auto scan = check_injectivity(run.trajectory);
        bool b0_dropped = false;
        for (const auto b0 : run.b0_at)
            if (b0 < 2) b0_dropped = true;
        r.require(!scan.merge_events.empty() || b0_dropped,
                  "no merge event and no b0 drop in the supercritical run");
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "; large eta: %zu consecutive supercritical steps, %zu merges, b0 drop=%d",
                      best, scan.merge_events.size(), b0_dropped ? 1 : 0);
        r.detail += buf;
    }
    return r;
}

// 7. Optimal one-step decrease at eta* = 1/K.
CriterionResult criterion_7() {
    CriterionResult r;
    const double K = 4.0;
    const auto oracle = diagonal_quadratic_oracle({K, K, K});
    const auto x = random_collection(4, 3, 13);

    std::vector<double> grid;
    for (int j = 1; j <= 19; ++j) grid.push_back(static_cast<double>(j) * 0.1 / K);
    const auto rows = one_step_loss_decrease(oracle, x, grid);
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].decrease > rows[best].decrease) best = i;
    const double target = 1.0 / K;
    double nearest = grid[0];
    for (double g : grid)
        if (std::abs(g - target) < std::abs(nearest - target)) nearest = g;
    r.require(rows[best].eta == nearest, "peak not at the grid point nearest 1/K");

    const auto reflect = one_step_loss_decrease(oracle, x, {2.0 / K});
    r.require(std::abs(reflect[0].decrease) <= 1e-9, "decrease at 2/K not ~ 0");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "peak at eta = %.4f (1/K = %.4f); decrease(2/K) = %.2g",
                  rows[best].eta, target, reflect[0].decrease);
    r.detail = buf;
    return r;
}

// 8. Sharpness estimator accuracy.
CriterionResult criterion_8() {
    CriterionResult r;

    // Two-layer net with 405 parameters.
    const std::size_t d = 8, h = 45;
    const Dataset data =
        generate_teacher_dataset(TeacherSpec::draw(6, d, 17), 64, d, 17, 1.0);
    Batch all(64);
    for (std::size_t i = 0; i < 64; ++i) all[i] = i;
    const GradientOracle oracle = make_loss_oracle(d, 1, data, all, "mse");
    const auto x = random_collection(h, d + 1, 18);

    const auto est = power_iteration(oracle, x, 3000, 1e-9, 19);
    const auto eig = numeric::symmetric_eigenvalues(dense_fd_hessian(oracle, x, 1e-4));
    const double dense_top = std::abs(eig[0]);
    const double rel = std::abs(est.k_hat - dense_top) / dense_top;
    r.require(rel <= 1e-3, "net k_hat off by relative " + std::to_string(rel));

    // Diagonal quadratic.
    const auto quad = diagonal_quadratic_oracle({3.0, 1.0, 0.5, 0.25});
    const auto qx = random_collection(2, 4, 20);
    const auto qest = power_iteration(quad, qx, 5000, 1e-10, 21);
    const double qrel = std::abs(qest.k_hat - 3.0) / 3.0;
    r.require(qrel <= 1e-6, "quadratic k_hat off by relative " + std::to_string(qrel));

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "net: k_hat=%.6g vs dense %.6g (rel %.2g); quadratic rel %.2g",
                  est.k_hat, dense_top, rel, qrel);
    r.detail = buf;
    return r;
}

// 9. Jacobian singular-value band at eta * k_hat = 0.5.
CriterionResult criterion_9() {
    CriterionResult r;
    const std::size_t d = 8, h = 24;
    const Dataset data =
        generate_teacher_dataset(TeacherSpec::draw(6, d, 23), 64, d, 23, 1.0);
    Batch all(64);
    for (std::size_t i = 0; i < 64; ++i) all[i] = i;
    const GradientOracle oracle = make_loss_oracle(d, 1, data, all, "mse");
    const auto x = random_collection(h, d + 1, 24);

    const double k_hat = power_iteration(oracle, x, 2000, 1e-8, 25).k_hat;
    const StepSize eta(0.5 / k_hat);
    const UpdateRuleFn gd = [&](const ParticleCollection& c) {
        return gd_update(oracle, c);
    };
    const auto [lo, hi] = check_jacobian_svs(gd, x, eta, k_hat, 10, 26);
    r.require(lo >= 0.5 - 1e-3, "singular value below the band");
    r.require(hi <= 1.5 + 1e-3, "singular value above the band");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "10 neurons: singular values in [%.5f, %.5f]", lo, hi);
    r.detail = buf;
    return r;
}

// 10. Multiplicity histogram preservation.
CriterionResult criterion_10() {
    CriterionResult r;
    Dataset data;
    const GradientOracle oracle = teacher_task_oracle(data, 1, 256, 27);
    ParticleCollection init = two_circle_init(48, 27);
    std::vector<std::int64_t> mult(48, 1);
    mult[0] = 3;
    init.set_multiplicity(mult);

    const double k0 = power_iteration(oracle, init, 400, 1e-6, 27).k_hat;

    // Subcritical run: histogram must be preserved at every step.
    {
        const PhaseRun run = phase_run(oracle, "gd", init, 0.25 / k0, 1200, 400, 28);
        const auto report = check_measure_preservation(run.trajectory, run.eta_k);
        r.require(report.ok, "histogram changed during the subcritical run");
        r.require(multiplicity_histogram(run.trajectory.back()).back() == 3,
                  "seeded multiplicity lost");
    }

    // Supercritical run: any histogram change must coincide with a run that
    // contains steps at eta * k_hat >= 1.
    {
        const PhaseRun run = phase_run(oracle, "gd", init, 2.5 / k0, 1200, 400, 29);
        auto hist0 = multiplicity_histogram(run.trajectory.front());
        bool changed = false;
        for (const auto& snap : run.trajectory)
            if (multiplicity_histogram(snap) != hist0) changed = true;
        bool supercritical = false;
        for (double ek : run.eta_k)
            if (ek >= 1.0) supercritical = true;
        if (changed)
            r.require(supercritical,
                      "histogram changed without any supercritical step");
        char buf[128];
        std::snprintf(buf, sizeof(buf), "supercritical run: changed=%d, eta*k>=1 seen=%d",
                      changed ? 1 : 0, supercritical ? 1 : 0);
        r.detail = buf;
    }
    return r;
}

// 11. Adam progressive sharpening (qualitative, warning only).
CriterionResult criterion_11() {
    CriterionResult r;
    Dataset data;
    const GradientOracle oracle = teacher_task_oracle(data, 1, 256, 31, 16);
    const auto init = two_circle_init(160, 31);

    const double eta = 1e-3;
    const PhaseRun run = phase_run(oracle, "adam", init, eta, 12000, 200, 32);
    r.require(!run.diverged, "adam run diverged");

    const double k_base = run.k_hat.front();
    // First step where k_hat has doubled, and where eta * k_hat crosses 1.
    std::optional<std::size_t> doubled_at, crossed_at, betti_change_at;
    for (std::size_t t = 0; t < run.k_hat.size(); ++t) {
        if (!doubled_at && run.k_hat[t] >= 2.0 * k_base) doubled_at = t;
        if (!crossed_at && eta * run.k_hat[t] > 1.0) crossed_at = t;
    }
    // Compare (b0, b1) only: these clouds are measured with max_dim = 2, where
    // b2 would count the unbounded 2-cycles of the 2-skeleton.
    for (std::size_t i = 1; i < run.betti_profiles.size(); ++i) {
        const bool same = run.betti_profiles[i].b0 == run.betti_profiles[0].b0 &&
                          run.betti_profiles[i].b1 == run.betti_profiles[0].b1;
        if (!betti_change_at && !same) betti_change_at = run.betti_steps[i];
    }

    char buf[224];
    std::snprintf(buf, sizeof(buf),
                  "k0=%.4g doubled@%s crossed@%s betti_change@%s",
                  k_base,
                  doubled_at ? std::to_string(*doubled_at).c_str() : "never",
                  crossed_at ? std::to_string(*crossed_at).c_str() : "never",
                  betti_change_at ? std::to_string(*betti_change_at).c_str() : "never");
    r.detail = buf;

    const bool sharpening_before_change =
        doubled_at && (!betti_change_at || *doubled_at < *betti_change_at);
    r.warn(sharpening_before_change, "no 2x sharpening before the first Betti change");
    const bool change_only_after_crossing =
        !betti_change_at || (crossed_at && *crossed_at <= *betti_change_at);
    r.warn(change_only_after_crossing,
           "Betti change observed before eta*k first exceeded 1");
    return r;
}

struct Criterion {
    int number;
    const char* name;
    double time_limit_sec;
    std::function<CriterionResult()> fn;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "equivariance suite (gd/momentum/adam)", 10.0, criterion_1},
        {2, "duplicated-neuron drift", 10.0, criterion_2},
        {3, "bi-Lipschitz band on quadratics", 5.0, criterion_3},
        {4, "betti oracle equivalence + fixtures", 60.0, criterion_4},
        {5, "sphere initialization (1,0,1)", 120.0, criterion_5},
        {6, "topological phase behavior", 600.0, criterion_6},
        {7, "eta* optimality of one-step decrease", 1.0, criterion_7},
        {8, "sharpness estimator accuracy", 30.0, criterion_8},
        {9, "jacobian singular-value band", 30.0, criterion_9},
        {10, "multiplicity histogram preservation", 120.0, criterion_10},
        {11, "adam progressive sharpening (flagged)", 600.0, criterion_11},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), criterion.number) ==
                selected.end())
            continue;
        const auto start = std::chrono::steady_clock::now();
        CriterionResult result;
        try {
            result = criterion.fn();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (elapsed > criterion.time_limit_sec) {
            result.pass = false;
            result.detail += "; over the " + std::to_string(criterion.time_limit_sec) +
                             "s time limit";
        }
        const char* verdict = result.pass ? (result.warn_only ? "WARN" : "PASS") : "FAIL";
        std::printf("[%s] criterion %2d: %-44s (%.1fs) %s\n", verdict, criterion.number,
                    criterion.name, elapsed, result.detail.c_str());
        std::fflush(stdout);
        if (!result.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
