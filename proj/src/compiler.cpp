#include "qprune/compiler.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qprune {

Layout Layout::identity(std::uint32_t num_physical) {
    Layout l;
    l.log_to_phys_.resize(num_physical);
    l.phys_to_log_.resize(num_physical);
    std::iota(l.log_to_phys_.begin(), l.log_to_phys_.end(), 0U);
    std::iota(l.phys_to_log_.begin(), l.phys_to_log_.end(), 0U);
    return l;
}

void Layout::apply_swap(std::uint32_t p, std::uint32_t q) {
    const std::uint32_t lp = phys_to_log_[p];
    const std::uint32_t lq = phys_to_log_[q];
    std::swap(phys_to_log_[p], phys_to_log_[q]);
    log_to_phys_[lp] = q;
    log_to_phys_[lq] = p;
    assert(log_to_phys_[phys_to_log_[p]] == p && log_to_phys_[phys_to_log_[q]] == q);
}

namespace {

/// Next hop from v toward q along a shortest path, lowest index first.
std::uint32_t next_hop(const Topology& topo, std::uint32_t v, std::uint32_t q) {
    const std::uint32_t need = topo.distance(v, q) - 1;
    for (std::uint32_t w : topo.neighbors(v)) {
        if (topo.distance(w, q) == need) {
            return w;
        }
    }
    throw std::logic_error("next_hop: no neighbor decreases the distance");
}

Gate retarget(const Gate& g, std::uint32_t p0, std::uint32_t p1) {
    Gate out = g;
    out.q0 = p0;
    out.q1 = p1;
    return out;
}

} // namespace

CompilationResult route(const Circuit& circuit, const Topology& topology,
                        const CostModelParams& params, bool prune) {
    params.validate();
    if (circuit.num_qubits() > topology.num_physical()) {
        throw std::invalid_argument("route: circuit is wider than the topology");
    }

    CompilationResult result;
    result.compiled = Circuit(topology.num_physical(), circuit.name());
    result.final_layout = Layout::identity(topology.num_physical());
    Layout& layout = result.final_layout;

    for (std::size_t gi = 0; gi < circuit.size(); ++gi) {
        const Gate& g = circuit[gi];
        if (!is_two_qubit(g.kind)) {
            Gate out = g;
            out.q0 = layout.phys_of(g.q0);
            result.compiled.add(out);
            continue;
        }

        std::uint32_t p = layout.phys_of(g.q0);
        std::uint32_t q = layout.phys_of(g.q1);
        const std::uint32_t d = swap_distance(topology, p, q);

        if (d > 0 && prune && is_prunable(g.kind) && should_prune(params, g.angle, d)) {
            result.pruned_gates.push_back({gi, g.angle, d});
            continue;
        }

        if (d > 0) {
            // walk both endpoints toward the middle of a shortest path:
            // ceil(d/2) hops from the q0 side, floor(d/2) from the q1 side
            const std::uint32_t from_p = (d + 1) / 2;
            for (std::uint32_t step = 0; step < d; ++step) {
                std::uint32_t a = 0;
                std::uint32_t b = 0;
                if (step < from_p) {
                    a = p;
                    b = next_hop(topology, p, q);
                    p = b;
                } else {
                    a = q;
                    b = next_hop(topology, q, p);
                    q = b;
                }
                result.compiled.add(Gate::swap(a, b));
                layout.apply_swap(a, b);
                ++result.swaps_inserted;
            }
            assert(topology.adjacent(p, q));
        }
        result.compiled.add(retarget(g, p, q));
    }
    return result;
}

Circuit approximation_prune(const Circuit& circuit, std::size_t k) {
    struct Candidate {
        double magnitude;
        std::size_t index;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < circuit.size(); ++i) {
        if (is_prunable(circuit[i].kind)) {
            candidates.push_back({std::abs(wrap_angle(circuit[i].angle)), i});
        }
    }
    if (k > candidates.size()) {
        throw std::invalid_argument("approximation_prune: k exceeds the number of prunable gates");
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.magnitude != b.magnitude ? a.magnitude < b.magnitude
                                                           : a.index < b.index;
                     });
    std::vector<bool> drop(circuit.size(), false);
    for (std::size_t i = 0; i < k; ++i) {
        drop[candidates[i].index] = true;
    }
    Circuit out(circuit.num_qubits(), circuit.name());
    out.reserve(circuit.size() - k);
    for (std::size_t i = 0; i < circuit.size(); ++i) {
        if (!drop[i]) {
            out.add(circuit[i]);
        }
    }
    return out;
}

namespace {

constexpr double kPi = std::numbers::pi;

void emit_h(Circuit& out, std::uint32_t q) {
    out.add(Gate::rz(kPi / 2.0, q));
    out.add(Gate::sx(q));
    out.add(Gate::rz(kPi / 2.0, q));
}

void emit_crz(Circuit& out, double theta, std::uint32_t c, std::uint32_t t) {
    out.add(Gate::rz(theta / 2.0, t));
    out.add(Gate::cx(c, t));
    out.add(Gate::rz(-theta / 2.0, t));
    out.add(Gate::cx(c, t));
}

void emit_gate(Circuit& out, const Gate& g) {
    switch (g.kind) {
    case GateKind::X:
    case GateKind::SX:
    case GateKind::RZ:
    case GateKind::ID:
    case GateKind::CX:
        out.add(g);
        return;
    case GateKind::H:
        emit_h(out, g.q0);
        return;
    case GateKind::SWAP:
        out.add(Gate::cx(g.q0, g.q1));
        out.add(Gate::cx(g.q1, g.q0));
        out.add(Gate::cx(g.q0, g.q1));
        return;
    case GateKind::CRZ:
        emit_crz(out, g.angle, g.q0, g.q1);
        return;
    case GateKind::CP:
        // CP(theta) = CRZ(theta) with an extra RZ(theta/2) on the control,
        // up to global phase
        emit_crz(out, g.angle, g.q0, g.q1);
        out.add(Gate::rz(g.angle / 2.0, g.q0));
        return;
    case GateKind::RZZ:
        out.add(Gate::cx(g.q0, g.q1));
        out.add(Gate::rz(g.angle, g.q1));
        out.add(Gate::cx(g.q0, g.q1));
        return;
    case GateKind::CRX:
        // conjugate CRZ by H on the target: H RZ(theta) H = RX(theta)
        emit_h(out, g.q1);
        emit_crz(out, g.angle, g.q0, g.q1);
        emit_h(out, g.q1);
        return;
    case GateKind::CRY:
        // conjugate CRZ by SX on the target: SX† RZ(theta) SX = RY(theta);
        // SX† is emitted as SX followed by X
        out.add(Gate::sx(g.q1));
        emit_crz(out, g.angle, g.q0, g.q1);
        out.add(Gate::sx(g.q1));
        out.add(Gate::x(g.q1));
        return;
    }
    throw std::invalid_argument("decompose_to_basis: unsupported kind");
}

} // namespace

Circuit decompose_to_basis(const Circuit& circuit) {
    Circuit out(circuit.num_qubits(), circuit.name());
    out.reserve(circuit.size() * 2);
    for (const auto& g : circuit) {
        emit_gate(out, g);
    }
    return out;
}

CompilationResult compile_pipeline(const Circuit& circuit, const Topology& topology,
                                   const CostModelParams& params, PipelineMode mode,
                                   std::size_t baseline_k) {
    CompilationResult result;
    switch (mode) {
    case PipelineMode::Noisy:
        result = route(circuit, topology, params, /*prune=*/false);
        break;
    case PipelineMode::Pruned:
        result = route(circuit, topology, params, /*prune=*/true);
        break;
    case PipelineMode::Baseline: {
        const Circuit thinned = approximation_prune(circuit, baseline_k);
        result = route(thinned, topology, params, /*prune=*/false);
        break;
    }
    }
    result.compiled = decompose_to_basis(result.compiled);
    return result;
}

} // namespace qprune
