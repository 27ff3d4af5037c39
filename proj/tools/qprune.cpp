// qprune command-line front end: benchmark generation, routing-aware
// compilation, noisy simulation, and the full experiment pipeline.

#include "qprune/bench.hpp"
#include "qprune/circuit.hpp"
#include "qprune/compiler.hpp"
#include "qprune/fidelity.hpp"
#include "qprune/simulator.hpp"
#include "qprune/topology.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << text;
}

/// "grid:RxC" -> Topology
qprune::Topology parse_topology(const std::string& spec) {
    if (spec.rfind("grid:", 0) == 0) {
        const std::string dims = spec.substr(5);
        const auto x = dims.find('x');
        if (x == std::string::npos) {
            throw std::runtime_error("topology spec must look like grid:2x4");
        }
        const auto rows = static_cast<std::uint32_t>(std::stoul(dims.substr(0, x)));
        const auto cols = static_cast<std::uint32_t>(std::stoul(dims.substr(x + 1)));
        return qprune::make_grid(rows, cols);
    }
    throw std::runtime_error("unsupported topology spec '" + spec + "'");
}

qprune::NoiseModel parse_noise_file(const std::string& path) {
    const json in = json::parse(read_file(path));
    qprune::NoiseModel nm;
    nm.t1_s = std::numeric_limits<double>::infinity();
    nm.t2_s = std::numeric_limits<double>::infinity();
    if (in.contains("p2")) {
        nm.p2 = in.at("p2").get<double>();
    }
    if (in.contains("t1_s")) {
        nm.t1_s = in.at("t1_s").get<double>();
    }
    if (in.contains("t2_s")) {
        nm.t2_s = in.at("t2_s").get<double>();
    }
    if (in.contains("dur_1q_s")) {
        nm.dur_1q_s = in.at("dur_1q_s").get<double>();
    }
    if (in.contains("dur_2q_s")) {
        nm.dur_2q_s = in.at("dur_2q_s").get<double>();
    }
    nm.validate();
    return nm;
}

int cmd_generate(const std::string& family, std::uint32_t n, std::uint64_t seed,
                 std::uint32_t layers, const std::string& out_path) {
    const auto fam = qprune::family_from_name(family);
    if (!fam) {
        std::cerr << "unknown family '" << family << "'\n";
        return 1;
    }
    const qprune::Circuit c = qprune::gen_family(*fam, n, seed, layers);
    write_file(out_path, qprune::emit_qasm(c));
    std::cerr << "wrote " << c.size() << " gates to " << out_path << "\n";
    return 0;
}

int cmd_compile(const std::string& in_path, const std::string& out_path,
                const std::string& topo_spec, bool prune, long baseline_k, double p2,
                double overhead, const std::string& stats_path) {
    const qprune::Circuit circuit = qprune::parse_qasm(read_file(in_path));
    const qprune::Topology topo =
        topo_spec.empty() ? qprune::grid_for_width(circuit.num_qubits())
                          : parse_topology(topo_spec);
    qprune::CostModelParams params;
    params.p2 = p2;
    params.routing_overhead = overhead;

    qprune::PipelineMode mode = qprune::PipelineMode::Noisy;
    std::size_t k = 0;
    if (prune && baseline_k >= 0) {
        std::cerr << "--prune and --baseline-k are mutually exclusive\n";
        return 1;
    }
    if (prune) {
        mode = qprune::PipelineMode::Pruned;
    } else if (baseline_k >= 0) {
        mode = qprune::PipelineMode::Baseline;
        k = static_cast<std::size_t>(baseline_k);
    }

    const qprune::CompilationResult result =
        qprune::compile_pipeline(circuit, topo, params, mode, k);
    write_file(out_path, qprune::emit_qasm(result.compiled));

    json stats;
    stats["num_physical"] = topo.num_physical();
    stats["gates"] = qprune::count_gates(result.compiled);
    stats["cx"] = qprune::count_gates(result.compiled, qprune::GateKind::CX);
    stats["swaps_inserted"] = result.swaps_inserted;
    stats["gates_pruned"] = result.pruned_gates.size();
    json pruned = json::array();
    for (const auto& pg : result.pruned_gates) {
        pruned.push_back(json{{"index", pg.original_index},
                              {"theta", pg.angle},
                              {"swap_distance", pg.swap_distance}});
    }
    stats["pruned"] = pruned;
    stats["final_layout"] = result.final_layout.log_to_phys();
    if (!stats_path.empty()) {
        write_file(stats_path, stats.dump(2) + "\n");
    }
    std::cerr << "compiled: " << stats["cx"] << " cx, " << result.swaps_inserted
              << " swaps inserted, " << result.pruned_gates.size() << " gates pruned\n";
    return 0;
}

int cmd_simulate(const std::string& in_path, const std::string& noise_path,
                 std::uint64_t shots, std::uint64_t seed, const std::string& out_path) {
    const qprune::Circuit circuit = qprune::parse_qasm(read_file(in_path));
    qprune::NoiseModel nm;
    nm.t1_s = std::numeric_limits<double>::infinity();
    nm.t2_s = std::numeric_limits<double>::infinity();
    if (!noise_path.empty()) {
        nm = parse_noise_file(noise_path);
    }

    json out;
    out["qubits"] = circuit.num_qubits();
    out["gates"] = circuit.size();
    out["duration_s"] = qprune::circuit_duration(circuit, nm);
    if (circuit.num_qubits() <= 10) {
        const qprune::Statevector ideal = qprune::simulate_ideal(circuit);
        const qprune::DensityMatrix rho = qprune::simulate_noisy_dm(circuit, nm);
        out["engine"] = "dm";
        out["fidelity"] = qprune::state_fidelity(ideal, rho);
        out["fid_stderr"] = 0.0;
    } else {
        const qprune::TrajectoryEstimate est =
            qprune::simulate_noisy_traj(circuit, nm, shots, seed);
        out["engine"] = "traj";
        out["fidelity"] = est.fidelity;
        out["fid_stderr"] = est.std_error;
        out["shots"] = est.shots;
    }
    const std::string text = out.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_path,
              const std::string& json_path) {
    const qprune::ExperimentConfig config =
        qprune::ExperimentConfig::from_json_text(read_file(config_path));
    const qprune::ExperimentReport report = qprune::run_experiment(config);
    if (!out_path.empty()) {
        write_file(out_path, report.to_csv());
    } else {
        std::cout << report.to_csv();
    }
    if (!json_path.empty()) {
        write_file(json_path, report.to_json_text() + "\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qprune: routing-aware pruning toolkit for parametric quantum circuits"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "emit a benchmark circuit as OpenQASM 2.0");
    std::string gen_family_name = "qft";
    std::uint32_t gen_n = 4;
    std::uint64_t gen_seed = 1;
    std::uint32_t gen_layers = 1;
    std::string gen_out;
    gen->add_option("--family", gen_family_name,
                    "qft | qft_entangled | amplitude_estimation | qaoa | portfolio_qaoa | "
                    "random_parametric");
    gen->add_option("--n", gen_n, "circuit width")->required();
    gen->add_option("--seed", gen_seed, "generator seed (seeded families)");
    gen->add_option("--layers", gen_layers, "QAOA layers");
    gen->add_option("-o,--output", gen_out, "output .qasm path")->required();

    // compile
    auto* comp = app.add_subcommand("compile", "route (optionally prune) and lower to basis");
    std::string comp_in, comp_out, comp_topo, comp_stats;
    bool comp_prune = false;
    long comp_baseline_k = -1;
    double comp_p2 = 0.0;
    double comp_overhead = 1.25;
    comp->add_option("-i,--input", comp_in, "input .qasm")->required();
    comp->add_option("-o,--output", comp_out, "output .qasm")->required();
    comp->add_option("--topology", comp_topo, "grid:RxC (default: canonical grid for width)");
    comp->add_flag("--prune", comp_prune, "enable routing-aware pruning");
    comp->add_option("--baseline-k", comp_baseline_k,
                     "approximation-degree baseline: drop the k smallest angles first");
    comp->add_option("--p2", comp_p2, "depolarizing probability for the cost model");
    comp->add_option("--routing-overhead", comp_overhead, "overhead factor (default 1.25)");
    comp->add_option("--stats", comp_stats, "write compilation stats JSON here");

    // simulate
    auto* sim = app.add_subcommand("simulate", "noisy simulation of a basis-gate circuit");
    std::string sim_in, sim_noise, sim_out;
    std::uint64_t sim_shots = 20000;
    std::uint64_t sim_seed = 1;
    sim->add_option("-i,--input", sim_in, "input .qasm (basis gates)")->required();
    sim->add_option("--noise", sim_noise, "noise JSON: p2, t1_s, t2_s, dur_1q_s, dur_2q_s");
    sim->add_option("--shots", sim_shots, "trajectory shots (widths above 10)");
    sim->add_option("--seed", sim_seed, "trajectory seed");
    sim->add_option("-o,--output", sim_out, "write result JSON here (default stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "run the Ideal/Noisy/Pruned experiment pipeline");
    std::string bench_config, bench_out, bench_json;
    bench->add_option("--config", bench_config, "experiment config JSON")->required();
    bench->add_option("-o,--output", bench_out, "report CSV path (default stdout)");
    bench->add_option("--json", bench_json, "also write the report as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_generate(gen_family_name, gen_n, gen_seed, gen_layers, gen_out);
        }
        if (comp->parsed()) {
            return cmd_compile(comp_in, comp_out, comp_topo, comp_prune, comp_baseline_k,
                               comp_p2, comp_overhead, comp_stats);
        }
        if (sim->parsed()) {
            return cmd_simulate(sim_in, sim_noise, sim_shots, sim_seed, sim_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_config, bench_out, bench_json);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
