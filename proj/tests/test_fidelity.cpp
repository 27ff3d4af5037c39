#include "qprune/fidelity.hpp"

#include "qprune/linalg.hpp"
#include "qprune/rng.hpp"
#include "qprune/simulator.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qprune;

namespace {
constexpr double kPi = std::numbers::pi;

CMatrix axis_rotation(double nx, double ny, double nz, double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    CMatrix r(2);
    // cos(t/2) I - i sin(t/2) (nx X + ny Y + nz Z)
    r(0, 0) = cplx(c, -s * nz);
    r(0, 1) = cplx(-s * ny, -s * nx);
    r(1, 0) = cplx(s * ny, -s * nx);
    r(1, 1) = cplx(c, s * nz);
    return r;
}
} // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
    CHECK(wrap_angle(-7 * kPi) == doctest::Approx(kPi));
    CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("rotation_fidelity_bound: fixed values, evenness, wrapping") {
    CHECK(rotation_fidelity_bound(0.0) == 1.0);
    CHECK(rotation_fidelity_bound(kPi) == doctest::Approx(0.0).epsilon(1e-30));
    CHECK(rotation_fidelity_bound(kPi / 6) ==
          doctest::Approx(0.9330127018922193).epsilon(1e-14));
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double t = (rng.uniform() - 0.5) * 20.0;
        CHECK(rotation_fidelity_bound(t) == rotation_fidelity_bound(-t));
        CHECK(rotation_fidelity_bound(t) ==
              doctest::Approx(rotation_fidelity_bound(t + 2 * kPi)).epsilon(1e-9));
        CHECK(rotation_fidelity_bound(t) >= 0.0);
        CHECK(rotation_fidelity_bound(t) <= 1.0);
    }
}

TEST_CASE("swap_fidelity: frozen closed-form values at p2 = 0.005") {
    const CostModelParams params{0.005, 1.25};
    CHECK(swap_fidelity(params, 0) == 1.0);
    CHECK(swap_fidelity(params, 1) == doctest::Approx(0.977737615).epsilon(1e-8));
    CHECK(swap_fidelity(params, 3) == doctest::Approx(0.956052520).epsilon(1e-8));
    CHECK(swap_fidelity(params, 5) == doctest::Approx(0.914351152).epsilon(1e-8));
    // lower bound 1/16 as the depolarized limit
    CHECK(swap_fidelity(CostModelParams{0.999999, 1.25}, 50) >= 1.0 / 16.0);
}

TEST_CASE("swap_fidelity: monotone in d and p2 on a 50x50 grid") {
    for (int pi = 0; pi < 50; ++pi) {
        const double p2 = 0.02 * (pi + 1) / 50.0;
        double prev = 2.0;
        for (std::uint32_t d = 0; d < 50; ++d) {
            const double f = swap_fidelity(CostModelParams{p2, 1.25}, d);
            CHECK(f <= prev + 1e-15);
            prev = f;
        }
    }
    for (std::uint32_t d = 1; d < 50; ++d) {
        double prev = 2.0;
        for (int pi = 0; pi < 50; ++pi) {
            const double p2 = 0.02 * (pi + 1) / 50.0;
            const double f = swap_fidelity(CostModelParams{p2, 1.25}, d);
            CHECK(f <= prev + 1e-15);
            prev = f;
        }
    }
}

TEST_CASE("swap_fidelity: parameter validation") {
    CHECK_THROWS_AS(swap_fidelity(CostModelParams{-0.1, 1.25}, 1), std::invalid_argument);
    CHECK_THROWS_AS(swap_fidelity(CostModelParams{1.0, 1.25}, 1), std::invalid_argument);
    CHECK_THROWS_AS(swap_fidelity(CostModelParams{0.1, 0.5}, 1), std::invalid_argument);
}

TEST_CASE("should_prune: threshold behavior at p2 = 0.005, theta = pi/6") {
    const CostModelParams params{0.005, 1.25};
    CHECK_FALSE(should_prune(params, kPi / 6, 0));
    CHECK_FALSE(should_prune(params, kPi / 6, 1));
    CHECK_FALSE(should_prune(params, kPi / 6, 3));
    CHECK(should_prune(params, kPi / 6, 5));

    // adjacent gates and full rotations are never pruned
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double theta = (rng.uniform() - 0.5) * 6.0;
        CHECK_FALSE(should_prune(params, theta, 0));
        CHECK_FALSE(should_prune(CostModelParams{rng.uniform() * 0.9, 1.25}, kPi,
                                 static_cast<std::uint32_t>(rng.uniform_int(20))));
    }
    // ties keep the gate: p2 = 0 makes swap fidelity exactly 1
    CHECK_FALSE(should_prune(CostModelParams{0.0, 1.25}, 0.0, 7));
}

TEST_CASE("should_prune: monotone in distance for random (theta, p2)") {
    Rng rng(1234);
    for (int i = 0; i < 1000; ++i) {
        const double theta = (rng.uniform() - 0.5) * 2.0 * kPi;
        const double p2 = rng.uniform() * 0.05;
        const CostModelParams params{p2, 1.25};
        bool pruned = false;
        for (std::uint32_t d = 0; d < 12; ++d) {
            const bool now = should_prune(params, theta, d);
            if (pruned) {
                CHECK(now);
            }
            pruned = now;
        }
    }
}

TEST_CASE("should_prune: monotone in p2 per decision") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const double theta = (rng.uniform() - 0.5) * 2.0 * kPi;
        const std::uint32_t d = 1 + static_cast<std::uint32_t>(rng.uniform_int(8));
        const double pa = rng.uniform() * 0.4;
        const double pb = pa + rng.uniform() * (0.9 - pa);
        if (should_prune(CostModelParams{pa, 1.25}, theta, d)) {
            CHECK(should_prune(CostModelParams{pb, 1.25}, theta, d));
        }
    }
}

TEST_CASE("p2_heuristic") {
    CHECK(p2_heuristic(100, 10) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(p2_heuristic(200, 10) == doctest::Approx(0.0025).epsilon(1e-14));
    CHECK(p2_heuristic(5, 10) == 0.5); // raw value 4 is capped
    CHECK_THROWS_AS(p2_heuristic(0, 10), std::invalid_argument);
    CHECK_THROWS_AS(p2_heuristic(10, 0), std::invalid_argument);
}

TEST_CASE("relaxation_times") {
    const auto [t1a, t2a] = relaxation_times(10e-6);
    CHECK(t1a == doctest::Approx(20e-6));
    CHECK(t2a == doctest::Approx(20e-6));
    const auto [t1b, t2b] = relaxation_times(1.0);
    CHECK(t1b == 2.0);
    CHECK(t2b == 2.0);
    CHECK(t2b <= 2.0 * t1b);
    CHECK_THROWS_AS(relaxation_times(0.0), std::invalid_argument);
    CHECK_THROWS_AS(relaxation_times(-1.0), std::invalid_argument);
}

TEST_CASE("rotation bound holds for random states, axes and angles") {
    Rng rng(2024);
    double worst_margin = 1.0;
    for (int i = 0; i < 1000; ++i) {
        const auto n = static_cast<std::uint32_t>(2 + rng.uniform_int(3));
        Statevector psi(n);
        psi.amplitudes() = test::random_state(n, rng);

        double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
        const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
        nx /= len;
        ny /= len;
        nz /= len;
        const double theta = kPi - 2.0 * kPi * rng.uniform();
        const auto q = static_cast<std::uint32_t>(rng.uniform_int(n));

        Statevector rotated = psi;
        rotated.apply_unitary1(axis_rotation(nx, ny, nz, theta), q);
        const double fid = std::norm(psi.inner(rotated));
        const double bound = rotation_fidelity_bound(theta);
        CHECK(fid >= bound - 1e-10);
        worst_margin = std::min(worst_margin, fid - bound);
    }
    CHECK(worst_margin >= -1e-10);
}

TEST_CASE("rotation bound is sharp for |0> under an x-axis rotation") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double theta = kPi - 2.0 * kPi * rng.uniform();
        Statevector psi(2);
        Statevector rotated = psi;
        rotated.apply_unitary1(axis_rotation(1.0, 0.0, 0.0, theta), 0);
        const double fid = std::norm(psi.inner(rotated));
        CHECK(fid == doctest::Approx(rotation_fidelity_bound(theta)).epsilon(1e-12));
    }
}

TEST_CASE("rotation bound extends to the two-qubit ZZ rotation") {
    // exp(-i theta/2 Z(x)Z) has the same structure: ZZ is Hermitian and
    // squares to the identity, so the cos^2(theta/2) bound carries over
    Rng rng(6);
    for (int i = 0; i < 500; ++i) {
        const double theta = kPi - 2.0 * kPi * rng.uniform();
        Statevector psi(3);
        psi.amplitudes() = test::random_state(3, rng);
        Statevector rotated = psi;
        rotated.apply(Gate::rzz(theta, 0, 2));
        CHECK(std::norm(psi.inner(rotated)) >= rotation_fidelity_bound(theta) - 1e-10);
    }
}
