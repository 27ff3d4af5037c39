#pragma once

#include "qprune/circuit.hpp"
#include "qprune/topology.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qprune {

// ---------------------------------------------------------------------------
// Benchmark circuit generators
// ---------------------------------------------------------------------------

/// Standard QFT: per qubit i an H followed by CP(pi / 2^(k-i)) from every
/// k > i, then the mirror SWAP layer. The entangled variant prepends a GHZ
/// preparation (H plus a CX chain). Requires n >= 2.
Circuit gen_qft(std::uint32_t n, bool entangled);

/// Amplitude-estimation skeleton on n qubits (n - 1 evaluation qubits plus
/// one target): RY state prep with theta0 = 2 asin(sqrt(0.2)), controlled
/// powers CRY(2^k theta0), inverse QFT on the evaluation register.
/// Requires n >= 3.
Circuit gen_amplitude_estimation(std::uint32_t n);

/// QAOA ansatz: H layer, then per layer RZZ(gamma_l * w_ij) per problem
/// edge and an RX mixer per qubit (emitted as H-RZ-H). The plain variant
/// uses a seeded 3-regular-like graph with unit weights; the portfolio
/// variant a complete graph with weights in [0.05, 0.5]. gamma/beta are
/// seeded uniform in (0, pi). Requires n >= 3, layers >= 1.
Circuit gen_qaoa(std::uint32_t n, std::uint32_t layers, std::uint64_t seed, bool portfolio);

/// Stress family: an H layer followed by 4n random two-qubit gates
/// (prunable parametric kinds plus CX) with uniform angles in (-pi, pi].
Circuit gen_random_parametric(std::uint32_t n, std::uint64_t seed);

enum class BenchmarkFamily {
    Qft,
    QftEntangled,
    AmplitudeEstimation,
    Qaoa,
    PortfolioQaoa,
    RandomParametric,
};

std::string_view family_name(BenchmarkFamily f);
std::optional<BenchmarkFamily> family_from_name(std::string_view name);

/// Builds the named benchmark circuit at the given width.
Circuit gen_family(BenchmarkFamily family, std::uint32_t width, std::uint64_t seed,
                   std::uint32_t qaoa_layers = 1);

// ---------------------------------------------------------------------------
// Experiment pipeline
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::vector<BenchmarkFamily> families;
    std::vector<std::uint32_t> widths;
    /// Optional fixed topology; default picks grid_for_width per width.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> grid;
    /// Escape hatch: explicit coupling graph instead of a grid.
    std::optional<std::uint32_t> custom_num_qubits;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> custom_edges;
    /// Explicit depolarizing override. Unset derives p2 from the compiled
    /// unpruned gate count. Setting 0 selects the fully noiseless limit
    /// (relaxation off as well).
    std::optional<double> p2;
    double routing_overhead = 1.25;
    std::uint64_t shots = 20000;
    std::uint64_t seed = 1;
    std::optional<std::vector<std::size_t>> baseline_ks;
    std::uint32_t qaoa_layers = 1;
    bool relaxation = true;
    double dur_1q_s = 35e-9;
    double dur_2q_s = 300e-9;
    /// Widths up to this bound use exact density-matrix simulation;
    /// larger ones use trajectory sampling.
    std::uint32_t max_dm_qubits = 10;

    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct PipelineStats {
    std::size_t gates_total = 0;
    std::size_t cx = 0;
    std::uint32_t swaps_inserted = 0;
    std::size_t gates_pruned = 0;
    double fidelity = 0.0;
    double fid_stderr = 0.0;
};

struct BaselineCell {
    std::size_t k = 0;
    PipelineStats stats;
};

/// Results for one (family, width) cell.
struct ExperimentCell {
    std::string family;
    std::uint32_t width = 0;
    std::uint32_t rows = 0, cols = 0; ///< grid actually used
    double p2 = 0.0;
    double duration_s = 0.0;
    double t1_s = 0.0;
    double t2_s = 0.0;
    std::string engine; ///< "dm" or "traj"
    PipelineStats noisy;
    PipelineStats pruned;
    std::vector<BaselineCell> baselines;

    double rel_cx_reduction() const;
    double rel_fid_improvement() const;
};

struct ExperimentReport {
    std::vector<ExperimentCell> cells;

    std::string to_csv() const;
    std::string to_json_text() const;
    static ExperimentReport from_json_text(const std::string& text);
};

/// Runs the full Ideal/Noisy/Pruned (+ optional baseline sweep) comparison
/// for every (family, width) in the config. All modes of a cell share the
/// identity initial layout and one set of noise parameters derived from the
/// unpruned compiled circuit.
ExperimentReport run_experiment(const ExperimentConfig& config);

} // namespace qprune
