#include "qprune/simulator.hpp"

#include "qprune/bench.hpp"
#include "qprune/compiler.hpp"
#include "qprune/rng.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qprune;

namespace {
constexpr double kPi = std::numbers::pi;

Circuit random_basis_circuit(std::uint32_t n, std::size_t gates, Rng& rng) {
    Circuit c(n);
    for (std::size_t i = 0; i < gates; ++i) {
        switch (rng.uniform_int(4)) {
        case 0:
            c.add(Gate::rz((rng.uniform() - 0.5) * 2.0 * kPi,
                           static_cast<std::uint32_t>(rng.uniform_int(n))));
            break;
        case 1:
            c.add(Gate::sx(static_cast<std::uint32_t>(rng.uniform_int(n))));
            break;
        case 2:
            c.add(Gate::x(static_cast<std::uint32_t>(rng.uniform_int(n))));
            break;
        default: {
            const auto a = static_cast<std::uint32_t>(rng.uniform_int(n));
            auto b = static_cast<std::uint32_t>(rng.uniform_int(n - 1));
            if (b >= a) {
                ++b;
            }
            c.add(Gate::cx(a, b));
        }
        }
    }
    return c;
}

DensityMatrix random_density_matrix(std::uint32_t n, Rng& rng) {
    // mixture of a few random pure states
    const int terms = 1 + static_cast<int>(rng.uniform_int(3));
    std::vector<double> weights(terms);
    double total = 0.0;
    for (auto& w : weights) {
        w = rng.uniform() + 0.05;
        total += w;
    }
    DensityMatrix rho(n);
    auto& a = rho.data();
    std::fill(a.begin(), a.end(), cplx{});
    const std::size_t dim = rho.dim();
    for (int t = 0; t < terms; ++t) {
        const auto psi = test::random_state(n, rng);
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                a[r * dim + c] += (weights[t] / total) * psi[r] * std::conj(psi[c]);
            }
        }
    }
    return rho;
}

CMatrix dm_as_matrix(const DensityMatrix& rho) {
    CMatrix m(rho.dim());
    for (std::size_t r = 0; r < rho.dim(); ++r) {
        for (std::size_t c = 0; c < rho.dim(); ++c) {
            m(r, c) = rho.entry(r, c);
        }
    }
    return m;
}
} // namespace

TEST_CASE("simulate_ideal: textbook states") {
    Circuit h(1);
    h.add(Gate::h(0));
    const Statevector plus = simulate_ideal(h);
    CHECK(std::abs(plus.amplitudes()[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(plus.amplitudes()[1] - 1.0 / std::sqrt(2.0)) < 1e-15);

    Circuit bell(2);
    bell.add(Gate::h(0));
    bell.add(Gate::cx(0, 1));
    const Statevector phi = simulate_ideal(bell);
    CHECK(std::abs(phi.amplitudes()[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(phi.amplitudes()[3] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(phi.amplitudes()[1]) < 1e-15);
    CHECK(std::abs(phi.amplitudes()[2]) < 1e-15);
}

TEST_CASE("simulate_ideal: QFT of |0..0> is the uniform superposition") {
    for (std::uint32_t n : {2u, 3u, 5u, 8u}) {
        const Statevector psi = simulate_ideal(gen_qft(n, false));
        const double expect = std::pow(2.0, -0.5 * n);
        for (const auto& a : psi.amplitudes()) {
            CHECK(std::abs(a - expect) < 1e-10);
        }
    }
}

TEST_CASE("simulate_ideal agrees with the dense matrix oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        Circuit c(3);
        constexpr GateKind kinds[] = {GateKind::H,   GateKind::SX,  GateKind::RZ,
                                      GateKind::CX,  GateKind::SWAP, GateKind::CRZ,
                                      GateKind::CRX, GateKind::CRY, GateKind::CP,
                                      GateKind::RZZ, GateKind::X};
        for (int i = 0; i < 12; ++i) {
            const GateKind k = kinds[rng.uniform_int(11)];
            const double theta = (rng.uniform() - 0.5) * 4.0;
            if (is_two_qubit(k)) {
                const auto a = static_cast<std::uint32_t>(rng.uniform_int(3));
                auto b = static_cast<std::uint32_t>(rng.uniform_int(2));
                if (b >= a) {
                    ++b;
                }
                c.add(is_parametric(k) ? Gate::two_qubit(k, a, b, theta)
                                       : Gate::two_qubit(k, a, b));
            } else {
                const auto q = static_cast<std::uint32_t>(rng.uniform_int(3));
                c.add(is_parametric(k) ? Gate::one_qubit(k, q, theta) : Gate::one_qubit(k, q));
            }
        }
        const CMatrix u = test::circuit_unitary(c);
        const Statevector psi = simulate_ideal(c);
        for (std::size_t r = 0; r < 8; ++r) {
            CHECK(std::abs(psi.amplitudes()[r] - u(r, 0)) < 1e-12);
        }
    }
}

TEST_CASE("decomposition preserves every generator circuit's state") {
    std::vector<Circuit> circuits;
    for (std::uint32_t n : {4u, 6u, 8u, 10u}) {
        circuits.push_back(gen_qft(n, false));
        circuits.push_back(gen_qft(n, true));
        circuits.push_back(gen_amplitude_estimation(n));
        circuits.push_back(gen_qaoa(n, 1, 17, false));
        circuits.push_back(gen_qaoa(n, 1, 17, true));
        circuits.push_back(gen_random_parametric(n, 17));
    }
    for (const Circuit& c : circuits) {
        const Statevector a = simulate_ideal(c);
        const Statevector b = simulate_ideal(decompose_to_basis(c));
        CHECK(std::norm(a.inner(b)) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("simulate_noisy_dm: noiseless limit reproduces the pure state") {
    const Circuit c = decompose_to_basis(gen_qft(4, false));
    NoiseModel nm;
    nm.p2 = 0.0;
    nm.t1_s = 1e9;
    nm.t2_s = 1e9;
    const DensityMatrix rho = simulate_noisy_dm(c, nm);
    const Statevector psi = simulate_ideal(c);
    const DensityMatrix pure = DensityMatrix::from_pure(psi);
    double worst = 0.0;
    for (std::size_t r = 0; r < rho.dim(); ++r) {
        for (std::size_t cc = 0; cc < rho.dim(); ++cc) {
            worst = std::max(worst, std::abs(rho.entry(r, cc) - pure.entry(r, cc)));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("simulate_noisy_dm: full depolarization leaves I/4") {
    Circuit c(2);
    c.add(Gate::cx(0, 1));
    NoiseModel nm;
    nm.p2 = 1.0;
    nm.t1_s = 1e9;
    nm.t2_s = 1e9;
    const DensityMatrix rho = simulate_noisy_dm(c, nm);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t cc = 0; cc < 4; ++cc) {
            const double expect = r == cc ? 0.25 : 0.0;
            CHECK(std::abs(rho.entry(r, cc) - expect) < 1e-12);
        }
    }
}

TEST_CASE("simulate_noisy_dm: Bell pair under one depolarizing CX") {
    Circuit bell(2);
    bell.add(Gate::rz(kPi / 2, 0));
    bell.add(Gate::sx(0));
    bell.add(Gate::rz(kPi / 2, 0)); // H
    bell.add(Gate::cx(0, 1));
    NoiseModel nm;
    nm.p2 = 0.01;
    nm.t1_s = 1e9;
    nm.t2_s = 1e9;
    const DensityMatrix rho = simulate_noisy_dm(bell, nm);
    const Statevector ideal = simulate_ideal(bell);
    CHECK(state_fidelity(ideal, rho) == doctest::Approx(0.9925).epsilon(1e-9));
}

TEST_CASE("noise channels preserve trace, hermiticity and positivity") {
    Rng rng(555);
    for (int i = 0; i < 500; ++i) {
        DensityMatrix rho = random_density_matrix(2, rng);
        if (i % 2 == 0) {
            rho.depolarize_pair(rng.uniform(), 0, 1);
        } else {
            rho.thermal_relax(static_cast<std::uint32_t>(rng.uniform_int(2)),
                              rng.uniform() * 0.5, rng.uniform() * 0.4);
        }
        CHECK(std::abs(rho.trace() - cplx(1.0, 0.0)) < 1e-10);
        CHECK(rho.hermiticity_error() < 1e-10);
        const auto evs = test::hermitian_eigenvalues(dm_as_matrix(rho));
        for (const double ev : evs) {
            CHECK(ev >= -1e-9);
        }
    }
}

TEST_CASE("thermal relaxation decays toward |0> with the right rates") {
    // start in |1><1|, apply relaxation with known gamma
    DensityMatrix rho(1);
    auto& a = rho.data();
    a[0] = 0.0;
    a[3] = 1.0;
    rho.thermal_relax(0, 0.25, 0.0);
    CHECK(rho.entry(0, 0).real() == doctest::Approx(0.25));
    CHECK(rho.entry(1, 1).real() == doctest::Approx(0.75));

    // coherence decays by sqrt(1-gamma)(1-2 pz)
    DensityMatrix plus(1);
    auto& b = plus.data();
    b[0] = b[1] = b[2] = b[3] = 0.5;
    plus.thermal_relax(0, 0.19, 0.05);
    CHECK(plus.entry(0, 1).real() ==
          doctest::Approx(0.5 * std::sqrt(1.0 - 0.19) * 0.9).epsilon(1e-12));
}

TEST_CASE("simulate_noisy_traj: noiseless limit is exact") {
    const Circuit c = decompose_to_basis(gen_qft(4, false));
    NoiseModel nm;
    nm.p2 = 0.0;
    nm.t1_s = std::numeric_limits<double>::infinity();
    nm.t2_s = std::numeric_limits<double>::infinity();
    const TrajectoryEstimate est = simulate_noisy_traj(c, nm, 1000, 3);
    CHECK(est.fidelity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.std_error == 0.0);
    CHECK(est.shots == 1000);
}

TEST_CASE("simulate_noisy_traj: Bell depolarizing estimate within 3 sigma") {
    Circuit bell(2);
    bell.add(Gate::rz(kPi / 2, 0));
    bell.add(Gate::sx(0));
    bell.add(Gate::rz(kPi / 2, 0));
    bell.add(Gate::cx(0, 1));
    NoiseModel nm;
    nm.p2 = 0.01;
    nm.t1_s = 1e9;
    nm.t2_s = 1e9;
    const TrajectoryEstimate est = simulate_noisy_traj(bell, nm, 30000, 7);
    CHECK(est.std_error > 0.0);
    CHECK(std::abs(est.fidelity - 0.9925) <= 3.0 * est.std_error);
}

TEST_CASE("simulate_noisy_traj: reproducible for a fixed seed") {
    const Circuit c = decompose_to_basis(gen_qft(5, false));
    NoiseModel nm;
    nm.p2 = 0.01;
    nm.t1_s = 200e-6;
    nm.t2_s = 250e-6;
    const TrajectoryEstimate a = simulate_noisy_traj(c, nm, 5000, 99);
    const TrajectoryEstimate b = simulate_noisy_traj(c, nm, 5000, 99);
    CHECK(a.fidelity == b.fidelity);
    CHECK(a.std_error == b.std_error);
    const TrajectoryEstimate other = simulate_noisy_traj(c, nm, 5000, 100);
    CHECK(a.fidelity != other.fidelity);
}

TEST_CASE("trajectory estimates agree with the density matrix within 4 sigma") {
    Rng rng(808);
    for (int trial = 0; trial < 10; ++trial) {
        const auto n = static_cast<std::uint32_t>(4 + rng.uniform_int(3)); // 4..6
        const Circuit c = random_basis_circuit(n, 25 + rng.uniform_int(20), rng);
        NoiseModel nm;
        nm.p2 = 0.002 + rng.uniform() * 0.02;
        const double dur = circuit_duration(c, nm);
        if (dur > 0.0) {
            nm.t1_s = 2.0 * dur;
            nm.t2_s = 2.0 * dur;
        }
        const Statevector ideal = simulate_ideal(c);
        const double exact = state_fidelity(ideal, simulate_noisy_dm(c, nm));
        const TrajectoryEstimate est =
            simulate_noisy_traj(c, nm, 20000, 1000 + trial, ideal);
        CHECK(std::abs(est.fidelity - exact) <= 4.0 * est.std_error + 1e-9);
    }
}

TEST_CASE("8-qubit random circuit: trajectory within 3 sigma of the density matrix") {
    Rng rng(2718);
    const Circuit c = random_basis_circuit(8, 60, rng);
    NoiseModel nm;
    nm.p2 = 0.004;
    const double dur = circuit_duration(c, nm);
    nm.t1_s = 2.0 * dur;
    nm.t2_s = 2.0 * dur;
    const Statevector ideal = simulate_ideal(c);
    const double exact = state_fidelity(ideal, simulate_noisy_dm(c, nm));
    const TrajectoryEstimate est = simulate_noisy_traj(c, nm, 20000, 42, ideal);
    CHECK(std::abs(est.fidelity - exact) <= 3.0 * est.std_error);
}

TEST_CASE("width limits") {
    CHECK_THROWS_AS(simulate_ideal(Circuit(21)), std::invalid_argument);
    CHECK_THROWS_AS(simulate_noisy_dm(Circuit(11), NoiseModel{}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_noisy_traj(Circuit(21), NoiseModel{}, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_noisy_traj(Circuit(2), NoiseModel{}, 0, 1),
                    std::invalid_argument);
    Circuit nonbasis(2);
    nonbasis.add(Gate::h(0));
    CHECK_THROWS_AS(simulate_noisy_dm(nonbasis, NoiseModel{}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_noisy_traj(nonbasis, NoiseModel{}, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("trajectory sequential fallback (gamma near 1) matches the density matrix") {
    Rng rng(909);
    const Circuit c = random_basis_circuit(3, 12, rng);
    NoiseModel nm;
    nm.p2 = 0.01;
    nm.t1_s = 20e-9; // gamma = 1 - exp(-15) for a 300 ns gate
    nm.t2_s = 30e-9;
    const Statevector ideal = simulate_ideal(c);
    const double exact = state_fidelity(ideal, simulate_noisy_dm(c, nm));
    const TrajectoryEstimate est = simulate_noisy_traj(c, nm, 40000, 5, ideal);
    // near-total damping collapses almost every trajectory onto one state,
    // so the sample spread underestimates the rare-branch mass; allow a
    // small absolute slack on top of the 4 sigma window
    CHECK(std::abs(est.fidelity - exact) <= 4.0 * est.std_error + 2e-6);
}

TEST_CASE("state_fidelity: identities, orthogonality, permutation correction") {
    Circuit prep(2);
    prep.add(Gate::h(0));
    prep.add(Gate::cx(0, 1));
    const Statevector psi = simulate_ideal(prep);
    CHECK(state_fidelity(psi, psi) == doctest::Approx(1.0).epsilon(1e-14));

    Circuit zero(1);
    Circuit one(1);
    one.add(Gate::x(0));
    CHECK(state_fidelity(simulate_ideal(zero), simulate_ideal(one)) == 0.0);

    // |0>|1> vs |1>|0> under the layout that swaps the two qubits
    Circuit c01(2);
    c01.add(Gate::x(0)); // logical |q1 q0> = |01>
    Circuit c10(2);
    c10.add(Gate::x(1));
    Layout swapped = Layout::identity(2);
    swapped.apply_swap(0, 1);
    CHECK(state_fidelity(simulate_ideal(c01), simulate_ideal(c10), swapped) ==
          doctest::Approx(1.0));
    CHECK(state_fidelity(simulate_ideal(c01), simulate_ideal(c10)) == 0.0);

    Circuit wide(3);
    CHECK_THROWS_AS(state_fidelity(simulate_ideal(wide), simulate_ideal(zero)),
                    std::invalid_argument);
}

TEST_CASE("embed_ideal places logical amplitudes at layout positions") {
    Circuit prep(2);
    prep.add(Gate::x(0));
    const Statevector psi = simulate_ideal(prep); // |01> logical (qubit 0 set)
    Layout layout = Layout::identity(4);
    layout.apply_swap(0, 3); // logical 0 now lives at physical 3
    const Statevector phi = embed_ideal(psi, layout, 4);
    CHECK(std::abs(phi.amplitudes()[8] - 1.0) < 1e-15); // bit 3 set
    CHECK(phi.norm_sqr() == doctest::Approx(1.0));
}

TEST_CASE("circuit_duration") {
    NoiseModel nm; // defaults: 35 ns / 300 ns
    Circuit c(2);
    for (int i = 0; i < 10; ++i) {
        c.add(Gate::cx(0, 1));
    }
    CHECK(circuit_duration(c, nm) == doctest::Approx(3.0e-6));
    CHECK(circuit_duration(Circuit(2), nm) == 0.0);

    Circuit d(2);
    for (int i = 0; i < 4; ++i) {
        d.add(Gate::rz(0.1, 0));
    }
    d.add(Gate::cx(0, 1));
    d.add(Gate::cx(0, 1));
    CHECK(circuit_duration(d, nm) == doctest::Approx(740e-9));

    Circuit bad(2);
    bad.add(Gate::h(0));
    CHECK_THROWS_AS(circuit_duration(bad, nm), std::invalid_argument);
}

TEST_CASE("noise model validation") {
    NoiseModel nm;
    nm.p2 = 1.5;
    CHECK_THROWS_AS(nm.validate(), std::invalid_argument);
    nm.p2 = 0.1;
    nm.t1_s = 0.0;
    CHECK_THROWS_AS(nm.validate(), std::invalid_argument);
    nm.t1_s = 1e-6;
    nm.t2_s = 3e-6; // above the 2*t1 physicality bound
    CHECK_THROWS_AS(nm.validate(), std::invalid_argument);
    nm.t2_s = 2e-6;
    nm.validate();
    CHECK(nm.dephase_2q() >= 0.0);
}
