#pragma once

#include "qprune/circuit.hpp"
#include "qprune/compiler.hpp"
#include "qprune/linalg.hpp"

#include <cstdint>
#include <vector>

namespace qprune {

/// Noise attached to every CX of a compiled circuit: a two-qubit
/// depolarizing channel with parameter p2 followed by thermal relaxation
/// (T1 decay plus dephasing to a T2 envelope) on both involved qubits for
/// the gate's duration. Single-qubit gates are noiseless.
struct NoiseModel {
    double p2 = 0.0;
    double t1_s = 1e9;       ///< use a large value (or infinity) to disable
    double t2_s = 1e9;
    double dur_1q_s = 35e-9;
    double dur_2q_s = 300e-9;

    void validate() const;

    /// Amplitude-damping probability accumulated over a two-qubit gate.
    double gamma_2q() const;
    /// Pure-dephasing flip probability over a two-qubit gate, calibrated so
    /// the total off-diagonal decay is exp(-dur / T2).
    double dephase_2q() const;
};

/// Pure state as a dense amplitude vector; qubit q is bit q of the index.
class Statevector {
public:
    explicit Statevector(std::uint32_t num_qubits);

    std::uint32_t num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amp_.size(); }
    const std::vector<cplx>& amplitudes() const { return amp_; }
    std::vector<cplx>& amplitudes() { return amp_; }

    /// Applies any supported gate kind (fast paths for the basis set and
    /// diagonal two-qubit kinds, dense 2x2/4x4 fallback otherwise).
    void apply(const Gate& g);
    void apply_unitary1(const CMatrix& u, std::uint32_t q);
    void apply_unitary2(const CMatrix& u, std::uint32_t a, std::uint32_t b);

    cplx inner(const Statevector& other) const;
    double norm_sqr() const;
    void normalize();

    /// Probability of measuring |1> on qubit q.
    double pop1(std::uint32_t q) const;

private:
    std::uint32_t num_qubits_;
    std::vector<cplx> amp_;
};

/// Density matrix (row-major, dim x dim); practical up to 10 qubits.
class DensityMatrix {
public:
    explicit DensityMatrix(std::uint32_t num_qubits);
    static DensityMatrix from_pure(const Statevector& psi);

    std::uint32_t num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return dim_; }
    cplx entry(std::size_t r, std::size_t c) const { return a_[r * dim_ + c]; }
    std::vector<cplx>& data() { return a_; }
    const std::vector<cplx>& data() const { return a_; }

    void apply(const Gate& g);

    /// rho -> (1-p) rho + p * Tr_pair(rho) (x) I/4 on qubits (a, b).
    void depolarize_pair(double p, std::uint32_t a, std::uint32_t b);

    /// Thermal relaxation on one qubit: amplitude damping gamma composed
    /// with pure dephasing pz (off-diagonals scale by sqrt(1-gamma)(1-2 pz)).
    void thermal_relax(std::uint32_t q, double gamma, double pz);

    cplx trace() const;
    double hermiticity_error() const;

    /// <phi| rho |phi>
    double expectation(const Statevector& phi) const;

private:
    std::uint32_t num_qubits_;
    std::size_t dim_;
    std::vector<cplx> a_;
};

/// Noiseless statevector simulation from |0...0>. Deterministic.
/// Width limit: 20 qubits.
Statevector simulate_ideal(const Circuit& circuit);

/// Exact density-matrix evolution of a basis-gate circuit under the noise
/// model. Width limit: 10 qubits.
DensityMatrix simulate_noisy_dm(const Circuit& circuit, const NoiseModel& noise);

/// Monte-Carlo estimate of <target| rho |target> with its standard error.
struct TrajectoryEstimate {
    double fidelity = 0.0;
    double std_error = 0.0;
    std::uint64_t shots = 0;
};

/// Kraus-unraveled trajectory sampling of the same noise model on
/// statevectors. Each shot draws an independent stream derived from
/// (seed, shot index), so results are reproducible and independent of any
/// execution partitioning. Width limit: 20 qubits.
TrajectoryEstimate simulate_noisy_traj(const Circuit& circuit, const NoiseModel& noise,
                                       std::uint64_t shots, std::uint64_t seed,
                                       const Statevector& target);

/// Convenience overload: targets the circuit's own noiseless state.
TrajectoryEstimate simulate_noisy_traj(const Circuit& circuit, const NoiseModel& noise,
                                       std::uint64_t shots, std::uint64_t seed);

/// Re-expresses an ideal logical state in the physical frame of a compiled
/// circuit: logical qubit l sits at physical layout.phys_of(l), remaining
/// (ancilla) positions are |0>.
Statevector embed_ideal(const Statevector& ideal, const Layout& final_layout,
                        std::uint32_t num_physical);

/// <psi| rho |psi> (or |<psi|phi>|^2 for a pure noisy state) after
/// re-indexing the noisy state through the final layout.
double state_fidelity(const Statevector& ideal, const Statevector& noisy,
                      const Layout& final_layout);
double state_fidelity(const Statevector& ideal, const DensityMatrix& noisy,
                      const Layout& final_layout);

/// Overloads comparing equal-width states directly (identity layout).
double state_fidelity(const Statevector& ideal, const Statevector& noisy);
double state_fidelity(const Statevector& ideal, const DensityMatrix& noisy);

/// Serial execution time: dur_1q per single-qubit gate, dur_2q per CX.
/// The circuit must already be in basis gates.
double circuit_duration(const Circuit& circuit, const NoiseModel& noise);

} // namespace qprune
