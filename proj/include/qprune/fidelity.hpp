#pragma once

#include <cstdint>

namespace qprune {

/// Parameters of the closed-form routing cost model.
struct CostModelParams {
    /// Depolarizing probability per two-qubit gate, in [0, 1).
    double p2 = 0.0;
    /// Multiplicative allowance for non-optimal routing, applied to the
    /// swap distance before the per-qubit SWAP count is derived. >= 1.
    double routing_overhead = 1.25;

    void validate() const;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

/// Worst-case state fidelity of skipping a theta-rotation about any axis:
/// cos^2(theta/2) with theta wrapped into (-pi, pi]. Even in theta, 1 at
/// theta = 0, 0 at theta = pi.
double rotation_fidelity_bound(double theta);

/// Fidelity cost of routing two qubits that are d SWAPs apart:
///   F = (g + (1 - g) / 4)^2,  g = (1 - p2)^(3 s),  s = ceil(d_eff / 2),
/// with d_eff = ceil(routing_overhead * d). Models both qubits moving
/// toward the middle of the path, 3 CX per SWAP, depolarizing noise p2 per
/// CX. Returns exactly 1.0 at d = 0; never drops below 1/16.
double swap_fidelity(const CostModelParams& params, std::uint32_t d);

/// Pruning predicate: drop the gate iff the routing cost exceeds the
/// worst-case cost of skipping the rotation, i.e. swap_fidelity(d) is
/// strictly below rotation_fidelity_bound(theta). Ties keep the gate.
bool should_prune(const CostModelParams& params, double theta, std::uint32_t d);

/// Depolarizing parameter heuristic (gates / qubits)^-2, capped at 0.5 so
/// degenerate tiny circuits stay physical. Counts must be >= 1.
double p2_heuristic(std::uint64_t gate_count, std::uint64_t qubit_count);

struct RelaxationTimes {
    double t1_s;
    double t2_s;
};

/// T1 = T2 = 2 * circuit duration. Requires a positive duration.
RelaxationTimes relaxation_times(double circuit_duration_s);

} // namespace qprune
