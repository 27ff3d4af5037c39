#include "qprune/compiler.hpp"

#include "qprune/bench.hpp"
#include "qprune/rng.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qprune;

namespace {
constexpr double kPi = std::numbers::pi;

Circuit random_circuit(std::uint32_t n, std::size_t gates, Rng& rng) {
    Circuit c(n);
    constexpr GateKind kinds[] = {GateKind::X,   GateKind::SX,   GateKind::RZ,
                                  GateKind::H,   GateKind::CX,   GateKind::SWAP,
                                  GateKind::CRZ, GateKind::CRX,  GateKind::CRY,
                                  GateKind::CP,  GateKind::RZZ};
    for (std::size_t g = 0; g < gates; ++g) {
        const GateKind k = kinds[rng.uniform_int(11)];
        const double theta = (rng.uniform() - 0.5) * 2.0 * kPi;
        if (!is_two_qubit(k) || n < 2) {
            const GateKind kk = is_two_qubit(k) ? GateKind::RZ : k;
            const auto q = static_cast<std::uint32_t>(rng.uniform_int(n));
            c.add(is_parametric(kk) ? Gate::one_qubit(kk, q, theta) : Gate::one_qubit(kk, q));
        } else {
            const auto a = static_cast<std::uint32_t>(rng.uniform_int(n));
            auto b = static_cast<std::uint32_t>(rng.uniform_int(n - 1));
            if (b >= a) {
                ++b;
            }
            c.add(is_parametric(k) ? Gate::two_qubit(k, a, b, theta)
                                   : Gate::two_qubit(k, a, b));
        }
    }
    return c;
}

void check_respects_coupling(const Circuit& compiled, const Topology& topo) {
    for (const auto& g : compiled) {
        if (is_two_qubit(g.kind)) {
            CHECK(topo.adjacent(g.q0, g.q1));
        }
    }
}

/// Compiled output must equal the source up to the final layout permutation
/// and a global phase.
void check_unitary_equivalent(const Circuit& source, const CompilationResult& result,
                              std::uint32_t num_physical, double tol) {
    Circuit embedded(num_physical);
    for (const auto& g : source) {
        embedded.add(g);
    }
    const CMatrix expected =
        test::layout_unitary(result.final_layout) * test::circuit_unitary(embedded);
    const CMatrix actual = test::circuit_unitary(result.compiled);
    CHECK(actual.max_abs_diff_upto_phase(expected) <= tol);
}
} // namespace

TEST_CASE("route: adjacency-satisfying circuit passes through untouched") {
    const Topology topo = make_grid(2, 2);
    Circuit c(4);
    c.add(Gate::h(0));
    c.add(Gate::cx(0, 1));
    c.add(Gate::crz(kPi / 7, 2, 3));
    c.add(Gate::cp(0.01, 0, 2));
    const CompilationResult r = route(c, topo, CostModelParams{0.005, 1.25}, true);
    CHECK(r.swaps_inserted == 0);
    CHECK(r.pruned_gates.empty());
    CHECK(r.compiled.gates() == c.gates());
    CHECK(r.final_layout == Layout::identity(4));
}

TEST_CASE("route: small-angle gate across the grid is pruned; swaps otherwise") {
    // pi/6 at p2 = 0.005 crosses the pruning threshold at swap distance 5
    // (swap fidelity 0.93493 at d = 4 still beats the 0.93301 rotation
    // bound), so a 2x7 corner pair at distance 6 is discarded
    const Topology long_grid = make_grid(2, 7);
    Circuit far(14);
    far.add(Gate::crz(kPi / 6, 0, 13));
    const CompilationResult pruned = route(far, long_grid, CostModelParams{0.005, 1.25}, true);
    REQUIRE(pruned.pruned_gates.size() == 1);
    CHECK(pruned.swaps_inserted == 0);
    CHECK(pruned.compiled.empty());
    CHECK(pruned.pruned_gates[0].swap_distance == 6);
    CHECK(pruned.pruned_gates[0].original_index == 0);

    // 3x4 corners sit at distance 4: routed in both modes
    const Topology topo = make_grid(3, 4);
    Circuit c(12);
    c.add(Gate::crz(kPi / 6, 0, 11));
    const CompilationResult kept = route(c, topo, CostModelParams{0.005, 1.25}, true);
    CHECK(kept.pruned_gates.empty());
    CHECK(kept.swaps_inserted == 4);

    const CompilationResult routed = route(c, topo, CostModelParams{0.005, 1.25}, false);
    CHECK(routed.pruned_gates.empty());
    CHECK(routed.swaps_inserted == 4);
    REQUIRE(routed.compiled.size() == 5);
    CHECK(routed.compiled[4].kind == GateKind::CRZ);
    check_respects_coupling(routed.compiled, topo);
    check_unitary_equivalent(c, routed, 12, 1e-9);

    // a wider angle at the same distance is kept even on the long grid
    Circuit big(14);
    big.add(Gate::crz(kPi / 2, 0, 13));
    CHECK(route(big, long_grid, CostModelParams{0.005, 1.25}, true).pruned_gates.empty());
}

TEST_CASE("route: non-parametric two-qubit gates are never pruned") {
    const Topology topo = make_grid(2, 5);
    Circuit c(10);
    c.add(Gate::cx(0, 9));
    c.add(Gate::swap(0, 9));
    const CompilationResult r = route(c, topo, CostModelParams{0.2, 1.25}, true);
    CHECK(r.pruned_gates.empty());
    CHECK(count_gates(r.compiled, GateKind::CX) == 1);
}

TEST_CASE("route: width exceeding the topology is an error") {
    CHECK_THROWS_AS(route(Circuit(5), make_grid(2, 2), CostModelParams{}, false),
                    std::invalid_argument);
}

TEST_CASE("routing correctness oracle on random circuits") {
    Rng rng(31337);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.uniform_int(2)); // 2..3
        const Topology topo = n == 2 ? make_grid(1, 2) : make_grid(1, 3);
        const Circuit c = random_circuit(n, 8 + rng.uniform_int(10), rng);
        const CompilationResult r =
            compile_pipeline(c, topo, CostModelParams{0.005, 1.25}, PipelineMode::Noisy);
        check_respects_coupling(r.compiled, topo);
        check_unitary_equivalent(c, r, topo.num_physical(), 1e-9);
        ++checked;
    }
    // ancilla case: 3 logical qubits on a 4-node grid
    for (int trial = 0; trial < 20; ++trial) {
        const Topology topo = make_grid(2, 2);
        const Circuit c = random_circuit(3, 10, rng);
        const CompilationResult r =
            compile_pipeline(c, topo, CostModelParams{0.005, 1.25}, PipelineMode::Noisy);
        check_respects_coupling(r.compiled, topo);
        check_unitary_equivalent(c, r, 4, 1e-9);
        ++checked;
    }
    CHECK(checked == 80);
}

TEST_CASE("layout stays a bijection through swaps") {
    Layout l = Layout::identity(6);
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const auto p = static_cast<std::uint32_t>(rng.uniform_int(6));
        auto q = static_cast<std::uint32_t>(rng.uniform_int(5));
        if (q >= p) {
            ++q;
        }
        l.apply_swap(p, q);
        for (std::uint32_t v = 0; v < 6; ++v) {
            CHECK(l.log_of(l.phys_of(v)) == v);
            CHECK(l.phys_of(l.log_of(v)) == v);
        }
    }
}

TEST_CASE("approximation_prune on QFT-4") {
    const Circuit qft4 = gen_qft(4, false);
    CHECK(count_gates(qft4, GateKind::CP) == 6);

    CHECK(approximation_prune(qft4, 0) == qft4);

    const Circuit k1 = approximation_prune(qft4, 1);
    CHECK(count_gates(k1, GateKind::CP) == 5);
    for (const auto& g : k1) {
        if (g.kind == GateKind::CP) {
            CHECK(g.angle > kPi / 8 + 1e-12); // the single pi/8 gate is gone
        }
    }

    const Circuit k3 = approximation_prune(qft4, 3);
    CHECK(count_gates(k3, GateKind::CP) == 3);
    for (const auto& g : k3) {
        if (g.kind == GateKind::CP) {
            CHECK(g.angle == doctest::Approx(kPi / 2)); // only pi/2 gates remain
        }
    }

    CHECK_THROWS_AS(approximation_prune(qft4, 7), std::invalid_argument);
}

TEST_CASE("approximation_prune uses wrapped angle magnitudes") {
    Circuit c(2);
    c.add(Gate::cp(2 * kPi - 0.01, 0, 1)); // wrapped magnitude 0.01
    c.add(Gate::crz(0.5, 0, 1));
    const Circuit k1 = approximation_prune(c, 1);
    REQUIRE(k1.size() == 1);
    CHECK(k1[0].kind == GateKind::CRZ);
}

TEST_CASE("decompose_to_basis: every kind matches its unitary up to phase") {
    const Gate gates[] = {
        Gate::x(0),          Gate::sx(1),          Gate::rz(0.7, 0),
        Gate::id(1),         Gate::h(0),           Gate::cx(0, 1),
        Gate::cx(1, 0),      Gate::swap(0, 1),     Gate::crz(kPi / 3, 0, 1),
        Gate::crz(-1.1, 1, 0), Gate::crx(0.9, 0, 1), Gate::cry(2.3, 1, 0),
        Gate::cp(kPi / 5, 0, 1), Gate::rzz(1.7, 0, 1),
    };
    for (const Gate& g : gates) {
        Circuit c(2);
        c.add(g);
        const Circuit lowered = decompose_to_basis(c);
        for (const auto& lg : lowered) {
            CHECK(is_basis_gate(lg.kind));
        }
        const CMatrix expect = test::circuit_unitary(c);
        const CMatrix got = test::circuit_unitary(lowered);
        CHECK(got.max_abs_diff_upto_phase(expect) <= 1e-9);
    }
}

TEST_CASE("decompose_to_basis: structure of the standard expansions") {
    Circuit cxonly(2);
    cxonly.add(Gate::cx(0, 1));
    cxonly.add(Gate::cx(1, 0));
    CHECK(decompose_to_basis(cxonly) == cxonly);

    Circuit h(1);
    h.add(Gate::h(0));
    CHECK(decompose_to_basis(h).size() == 3);

    Circuit crz(2);
    crz.add(Gate::crz(kPi / 3, 0, 1));
    CHECK(decompose_to_basis(crz).size() == 4);
    CHECK(count_gates(decompose_to_basis(crz), GateKind::CX) == 2);

    Circuit sw(2);
    sw.add(Gate::swap(0, 1));
    CHECK(count_gates(decompose_to_basis(sw), GateKind::CX) == 3);
}

TEST_CASE("decompose_to_basis on random multi-qubit circuits") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const Circuit c = random_circuit(3, 12, rng);
        const Circuit lowered = decompose_to_basis(c);
        for (const auto& g : lowered) {
            CHECK(is_basis_gate(g.kind));
        }
        CHECK(test::circuit_unitary(lowered).max_abs_diff_upto_phase(
                  test::circuit_unitary(c)) <= 1e-9);
    }
}

TEST_CASE("compile_pipeline: mode relations") {
    const Topology topo = make_grid(2, 4);
    const CostModelParams params{0.005, 1.25};

    // no prunable kinds: noisy and pruned agree exactly
    Circuit plain(8);
    Rng rng(4);
    for (int i = 0; i < 30; ++i) {
        const auto a = static_cast<std::uint32_t>(rng.uniform_int(8));
        auto b = static_cast<std::uint32_t>(rng.uniform_int(7));
        if (b >= a) {
            ++b;
        }
        plain.add(Gate::cx(a, b));
        plain.add(Gate::h(a));
    }
    const auto noisy_plain = compile_pipeline(plain, topo, params, PipelineMode::Noisy);
    const auto pruned_plain = compile_pipeline(plain, topo, params, PipelineMode::Pruned);
    CHECK(noisy_plain.compiled == pruned_plain.compiled);
    CHECK(pruned_plain.pruned_gates.empty());

    // baseline with k = 0 is exactly the noisy pipeline
    const Circuit qft8 = gen_qft(8, false);
    const auto noisy = compile_pipeline(qft8, topo, params, PipelineMode::Noisy);
    const auto base0 = compile_pipeline(qft8, topo, params, PipelineMode::Baseline, 0);
    CHECK(noisy.compiled == base0.compiled);
    CHECK(emit_qasm(noisy.compiled) == emit_qasm(base0.compiled));

    // pruning only ever removes two-qubit work
    const auto pruned = compile_pipeline(qft8, topo, params, PipelineMode::Pruned);
    CHECK(pruned.pruned_gates.size() > 0);
    CHECK(count_gates(pruned.compiled, GateKind::CX) < count_gates(noisy.compiled, GateKind::CX));
    check_respects_coupling(noisy.compiled, topo);
    check_respects_coupling(pruned.compiled, topo);
}
