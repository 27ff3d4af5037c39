#pragma once

#include "qprune/circuit.hpp"
#include "qprune/fidelity.hpp"
#include "qprune/topology.hpp"

#include <cstdint>
#include <vector>

namespace qprune {

/// Bijection between logical and physical qubit indices. Logical indices
/// beyond the circuit width act as ancilla labels so both maps stay
/// bijections on [0, num_physical).
class Layout {
public:
    Layout() = default;

    static Layout identity(std::uint32_t num_physical);

    std::uint32_t size() const { return static_cast<std::uint32_t>(log_to_phys_.size()); }
    std::uint32_t phys_of(std::uint32_t logical) const { return log_to_phys_[logical]; }
    std::uint32_t log_of(std::uint32_t physical) const { return phys_to_log_[physical]; }

    /// Applies a SWAP on a physical pair: exactly the two affected entries
    /// of each map change.
    void apply_swap(std::uint32_t p, std::uint32_t q);

    const std::vector<std::uint32_t>& log_to_phys() const { return log_to_phys_; }

    bool operator==(const Layout& other) const = default;

private:
    std::vector<std::uint32_t> log_to_phys_;
    std::vector<std::uint32_t> phys_to_log_;
};

/// One routing-time pruning decision.
struct PrunedGate {
    std::size_t original_index; ///< position in the input circuit
    double angle;
    std::uint32_t swap_distance; ///< distance at decision time
};

struct CompilationResult {
    /// Circuit over physical qubits. route() leaves source kinds intact;
    /// compile_pipeline() lowers to the {CX, ID, RZ, SX, X} basis.
    Circuit compiled;
    Layout final_layout;
    std::vector<PrunedGate> pruned_gates;
    std::uint32_t swaps_inserted = 0;
};

/// Greedy SWAP router with an in-flight pruning hook. Gates are processed
/// in program order from an identity initial layout. A two-qubit gate whose
/// operands are not adjacent is either discarded (when pruning is enabled,
/// the kind is a prunable parametric kind, and the cost model says the
/// routing fidelity loss exceeds the rotation's worst-case contribution) or
/// routed by moving both endpoints toward the middle of a shortest path
/// (ceil(d/2) SWAPs from the first operand's side, floor(d/2) from the
/// other; lowest-index path as tie-break).
CompilationResult route(const Circuit& circuit, const Topology& topology,
                        const CostModelParams& params, bool prune);

/// Compilation-agnostic baseline: deletes the k prunable two-qubit gates
/// with the smallest wrapped |angle| before any routing. Ties are broken
/// toward the earliest program position. k must not exceed the number of
/// prunable gates.
Circuit approximation_prune(const Circuit& circuit, std::size_t k);

/// Lowers every gate to the {CX, ID, RZ, SX, X} basis. The output unitary
/// equals the input up to global phase.
Circuit decompose_to_basis(const Circuit& circuit);

enum class PipelineMode {
    Noisy,    ///< route without pruning, then decompose
    Pruned,   ///< route with the pruning hook enabled, then decompose
    Baseline, ///< approximation_prune(k), route without pruning, decompose
};

CompilationResult compile_pipeline(const Circuit& circuit, const Topology& topology,
                                   const CostModelParams& params, PipelineMode mode,
                                   std::size_t baseline_k = 0);

} // namespace qprune
