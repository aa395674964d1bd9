#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurotopo/diagnostics.hpp"
#include "neurotopo/models.hpp"
#include "neurotopo/rng.hpp"
#include "support/test_oracles.hpp"

using namespace neurotopo;
using neurotopo::testing::diagonal_quadratic_oracle;
using neurotopo::testing::random_collection;

namespace {

UpdateRuleFn gd_rule(const GradientOracle& oracle) {
    return [&oracle](const ParticleCollection& x) { return gd_update(oracle, x); };
}

Trajectory rollout(const UpdateRuleFn& rule, ParticleCollection x, std::size_t steps,
                   StepSize eta) {
    Trajectory traj{x};
    for (std::size_t t = 0; t < steps; ++t) {
        x = step(x, rule(x), eta);
        traj.push_back(x);
    }
    return traj;
}

} // namespace

TEST_CASE("check_well_definedness") {
    const auto oracle = diagonal_quadratic_oracle({2.0, 1.0});

    SUBCASE("gradient descent keeps duplicates identical, bitwise") {
        const double drift = check_well_definedness(gd_rule(oracle),
                                                    random_collection(6, 2, 1), 100,
                                                    StepSize(0.1));
        CHECK(drift == 0.0);
    }
    SUBCASE("adam packed keeps duplicates identical") {
        const UpdateRuleFn adam = [&](const ParticleCollection& x) {
            return adam_update(oracle, AdamPackedCollection(x, 0.9, 0.999, 1e-8, 1),
                               StepSize(0.01));
        };
        ParticleCollection packed(5, 6);
        Rng rng(2);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t k = 0; k < 2; ++k) packed(i, k) = rng.normal();
        const double drift = check_well_definedness(adam, packed, 100, StepSize(0.01));
        CHECK(drift <= 1e-12);
    }
    SUBCASE("index-dependent noise is detected") {
        Rng noise_rng(3);
        const UpdateRuleFn noisy = [&](const ParticleCollection& x) {
            ParticleCollection u = gd_update(oracle, x);
            for (std::size_t i = 0; i < u.count(); ++i) u(i, 0) += 1e-6 * double(i);
            return u;
        };
        const double drift = check_well_definedness(noisy, random_collection(4, 2, 4),
                                                    20, StepSize(0.1));
        CHECK(drift > 0.0);
    }
}

TEST_CASE("check_no_merge_split on quadratics") {
    // Hessian eigenvalues (4, 1): K = 4.
    const auto oracle = diagonal_quadratic_oracle({4.0, 1.0});
    const double lambda = 4.0;

    SUBCASE("subcritical step keeps every ratio inside the band") {
        const StepSize eta(0.5 / lambda);
        const auto traj = rollout(gd_rule(oracle), random_collection(8, 2, 5), 30, eta);
        const std::vector<double> k_per_step(30, lambda);
        const auto report = check_no_merge_split(gd_rule(oracle), traj, eta, k_per_step);
        CHECK(report.violations.empty());
        CHECK(report.max_excess <= 0.0);
        CHECK(report.min_ratio >= 1.0 - 0.5 - 1e-9);
        CHECK(report.max_ratio <= 1.0 + 0.5 + 1e-9);
        CHECK(report.max_identity_violation <= 1e-12);
    }
    SUBCASE("eta = 1/lambda merges an eigen-aligned pair in one step") {
        // Difference along the top eigendirection only.
        const ParticleCollection x(2, 2, {1.0, 0.5, 2.0, 0.5});
        const StepSize eta(0.25);  // 1/lambda, exact in binary
        const auto traj = rollout(gd_rule(oracle), x, 1, eta);
        CHECK(pair_distance(traj[1], 0, 1) <= 1e-12);
    }
    SUBCASE("the upper bound holds even for a supercritical step") {
        const StepSize eta(1.7 / lambda);
        const auto traj = rollout(gd_rule(oracle), random_collection(8, 2, 6), 15, eta);
        const std::vector<double> k_per_step(15, lambda);
        const auto report = check_no_merge_split(gd_rule(oracle), traj, eta, k_per_step);
        CHECK(report.max_ratio <= 1.0 + eta.value() * lambda + 1e-9);
        CHECK(report.max_identity_violation <= 1e-12);
    }
    SUBCASE("an understated k is reported as a band violation") {
        const StepSize eta(0.5 / lambda);
        const auto traj = rollout(gd_rule(oracle), random_collection(8, 2, 7), 10, eta);
        const std::vector<double> too_small(10, 0.05);
        const auto report = check_no_merge_split(gd_rule(oracle), traj, eta, too_small);
        CHECK(!report.violations.empty());
        CHECK(report.max_excess > 0.0);
    }
}

TEST_CASE("check_injectivity") {
    const auto oracle = diagonal_quadratic_oracle({4.0, 1.0});

    SUBCASE("subcritical teacher-student run has no merge events") {
        // Neurons converge to distinct attractors here, unlike an isotropic
        // quadratic whose global minimum would fuse the whole cloud.
        const auto data = generate_teacher_dataset(TeacherSpec::draw(4, 1, 71), 64, 1, 71);
        Batch all(64);
        for (std::size_t i = 0; i < 64; ++i) all[i] = i;
        const auto net_oracle = make_loss_oracle(1, 1, data, all, "mse");
        const auto eig = numeric::symmetric_eigenvalues(
            neurotopo::testing::dense_fd_hessian(net_oracle,
                                                 random_collection(12, 2, 72), 1e-4));
        const StepSize eta(0.05 / std::abs(eig[0]));
        const auto traj =
            rollout(gd_rule(net_oracle), random_collection(12, 2, 72), 200, eta);
        const auto report = check_injectivity(traj);
        CHECK(report.merge_events.empty());
        CHECK(report.split_events.empty());
    }
    SUBCASE("critical step merges an aligned pair and it stays merged") {
        ParticleCollection x(3, 2, {1.0, 0.5, 2.0, 0.5, -1.0, -0.4});
        const auto traj = rollout(gd_rule(oracle), x, 40, StepSize(0.25));
        const auto report = check_injectivity(traj);
        REQUIRE(!report.merge_events.empty());
        CHECK(report.merge_events.front().i == 0);
        CHECK(report.merge_events.front().j == 1);
        CHECK(report.split_events.empty());  // merged pairs must stay merged
    }
}

TEST_CASE("check_jacobian_svs") {
    SUBCASE("quadratic: Jacobian is I - eta H exactly") {
        const auto oracle = diagonal_quadratic_oracle({4.0, 1.0});
        const auto x = random_collection(5, 2, 9);
        const StepSize eta(0.125);
        const auto [lo, hi] = check_jacobian_svs(gd_rule(oracle), x, eta, 4.0, 5);
        // Singular values are 1 - 0.125*4 = 0.5 and 1 - 0.125*1 = 0.875.
        CHECK(lo == doctest::Approx(0.5).epsilon(1e-5));
        CHECK(hi == doctest::Approx(0.875).epsilon(1e-5));
        CHECK(lo >= 1.0 - eta.value() * 4.0 - 1e-3);
        CHECK(hi <= 1.0 + eta.value() * 4.0 + 1e-3);
    }
    SUBCASE("eta to zero sends all singular values to one") {
        const auto oracle = diagonal_quadratic_oracle({4.0, 1.0});
        const auto x = random_collection(4, 2, 10);
        const auto [lo, hi] = check_jacobian_svs(gd_rule(oracle), x, StepSize(1e-9),
                                                 4.0, 4);
        CHECK(lo == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(hi == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("supercritical regime is rejected") {
        const auto oracle = diagonal_quadratic_oracle({4.0});
        CHECK_THROWS_AS(check_jacobian_svs(gd_rule(oracle), random_collection(3, 1, 11),
                                           StepSize(0.5), 4.0, 3),
                        PreconditionError);
    }
    SUBCASE("two-layer net at eta k = 0.5 stays inside the band") {
        const auto data = generate_teacher_dataset(TeacherSpec::draw(4, 2, 12), 24, 2, 12);
        Batch all(24);
        for (std::size_t i = 0; i < 24; ++i) all[i] = i;
        const auto net_oracle = make_loss_oracle(2, 1, data, all, "mse");
        const auto x = random_collection(12, 3, 13);

        // Hessian top |eigenvalue| via the dense oracle path.
        const auto eig = numeric::symmetric_eigenvalues(
            neurotopo::testing::dense_fd_hessian(net_oracle, x, 1e-4));
        const double k_hat = std::abs(eig[0]);
        const StepSize eta(0.5 / k_hat);
        const auto [lo, hi] =
            check_jacobian_svs(gd_rule(net_oracle), x, eta, k_hat, 10);
        CHECK(lo >= 0.5 - 1e-3);
        CHECK(hi <= 1.5 + 1e-3);
    }
}

TEST_CASE("multiplicity histograms and measure preservation") {
    SUBCASE("uniform multiplicities stay {1 x N}") {
        const auto oracle = diagonal_quadratic_oracle({2.0, 1.0});
        ParticleCollection x = random_collection(6, 2, 14);
        x.set_multiplicity({1, 1, 1, 1, 1, 1});
        const auto traj = rollout(gd_rule(oracle), x, 50, StepSize(0.1));
        const std::vector<double> eta_k(50, 0.2);
        CHECK(check_measure_preservation(traj, eta_k).ok);
        CHECK(multiplicity_histogram(traj.back()) ==
              std::vector<std::int64_t>{1, 1, 1, 1, 1, 1});
    }
    SUBCASE("seeded multiplicities (3,1,1) survive a subcritical run") {
        const auto oracle = diagonal_quadratic_oracle({2.0, 1.0});
        ParticleCollection x = random_collection(3, 2, 15);
        x.set_multiplicity({3, 1, 1});
        const auto traj = rollout(gd_rule(oracle), x, 80, StepSize(0.2));
        const std::vector<double> eta_k(80, 0.4);
        const auto report = check_measure_preservation(traj, eta_k);
        CHECK(report.ok);
        CHECK(multiplicity_histogram(traj.back()) == std::vector<std::int64_t>{1, 1, 3});
    }
    SUBCASE("a forced merge changes the histogram and is attributed") {
        const auto oracle = diagonal_quadratic_oracle({4.0, 1.0});
        ParticleCollection x(3, 2, {1.0, 0.5, 2.0, 0.5, -1.0, -0.4});
        x.set_multiplicity({1, 1, 1});
        const StepSize eta(0.25);  // eta * K = 1
        const auto traj = rollout(gd_rule(oracle), x, 5, eta);

        // Supercritical labelling: the step is allowed to change the histogram.
        const std::vector<double> honest(5, 1.0);
        CHECK(check_measure_preservation(traj, honest).ok);

        // Mislabelling the same run as subcritical is detected.
        const std::vector<double> mislabeled(5, 0.5);
        const auto report = check_measure_preservation(traj, mislabeled);
        CHECK(!report.ok);
        CHECK(report.first_failing_step == 1);
    }
    SUBCASE("missing multiplicity vector is rejected") {
        const Trajectory traj{random_collection(3, 2, 16)};
        CHECK_THROWS_AS(check_measure_preservation(traj, {}), PreconditionError);
    }
}
