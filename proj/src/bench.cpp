#include "qprune/bench.hpp"

#include "qprune/compiler.hpp"
#include "qprune/fidelity.hpp"
#include "qprune/rng.hpp"
#include "qprune/simulator.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace qprune {

namespace {
constexpr double kPi = std::numbers::pi;

/// RY(theta) as a basis-expressible sequence: SX† RZ(theta) SX with
/// SX† emitted as SX followed by X.
void emit_ry(Circuit& c, double theta, std::uint32_t q) {
    c.add(Gate::sx(q));
    c.add(Gate::rz(theta, q));
    c.add(Gate::sx(q));
    c.add(Gate::x(q));
}

/// RX(theta) = H RZ(theta) H.
void emit_rx(Circuit& c, double theta, std::uint32_t q) {
    c.add(Gate::h(q));
    c.add(Gate::rz(theta, q));
    c.add(Gate::h(q));
}

} // namespace

Circuit gen_qft(std::uint32_t n, bool entangled) {
    if (n < 2) {
        throw std::invalid_argument("gen_qft: need at least 2 qubits");
    }
    Circuit c(n, entangled ? "qftentangled" : "qft");
    if (entangled) {
        c.add(Gate::h(0));
        for (std::uint32_t i = 0; i + 1 < n; ++i) {
            c.add(Gate::cx(i, i + 1));
        }
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        c.add(Gate::h(i));
        for (std::uint32_t k = i + 1; k < n; ++k) {
            c.add(Gate::cp(kPi / std::ldexp(1.0, static_cast<int>(k - i)), k, i));
        }
    }
    for (std::uint32_t i = 0; i < n / 2; ++i) {
        c.add(Gate::swap(i, n - 1 - i));
    }
    return c;
}

Circuit gen_amplitude_estimation(std::uint32_t n) {
    if (n < 3) {
        throw std::invalid_argument("gen_amplitude_estimation: need at least 3 qubits");
    }
    const std::uint32_t m = n - 1;     // evaluation register
    const std::uint32_t target = n - 1;
    const double theta0 = 2.0 * std::asin(std::sqrt(0.2));
    Circuit c(n, "ae");

    emit_ry(c, theta0, target);
    for (std::uint32_t k = 0; k < m; ++k) {
        c.add(Gate::h(k));
    }
    for (std::uint32_t k = 0; k < m; ++k) {
        c.add(Gate::cry(std::ldexp(theta0, static_cast<int>(k)), k, target));
    }
    // inverse QFT on the evaluation register
    for (std::uint32_t i = m / 2; i-- > 0;) {
        c.add(Gate::swap(i, m - 1 - i));
    }
    for (std::uint32_t i = m; i-- > 0;) {
        for (std::uint32_t k = m; k-- > i + 1;) {
            c.add(Gate::cp(-kPi / std::ldexp(1.0, static_cast<int>(k - i)), k, i));
        }
        c.add(Gate::h(i));
    }
    return c;
}

namespace {

struct WeightedEdge {
    std::uint32_t a, b;
    double w;
};

/// Seeded 3-regular-like graph by configuration-model stub matching with
/// full restarts; falls back to the best partial matching found.
std::vector<WeightedEdge> three_regular_like(std::uint32_t n, Rng& rng) {
    std::vector<std::uint32_t> stubs;
    for (std::uint32_t v = 0; v < n; ++v) {
        for (int s = 0; s < 3; ++s) {
            stubs.push_back(v);
        }
    }
    if (stubs.size() % 2 != 0) {
        stubs.pop_back();
    }

    std::vector<WeightedEdge> best;
    for (int attempt = 0; attempt < 32; ++attempt) {
        // Fisher-Yates
        for (std::size_t i = stubs.size() - 1; i > 0; --i) {
            std::swap(stubs[i], stubs[rng.uniform_int(i + 1)]);
        }
        std::vector<WeightedEdge> edges;
        std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
        bool clean = true;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            std::uint32_t a = stubs[i];
            std::uint32_t b = stubs[i + 1];
            if (a == b) {
                clean = false;
                continue;
            }
            if (a > b) {
                std::swap(a, b);
            }
            if (!seen.insert({a, b}).second) {
                clean = false;
                continue;
            }
            edges.push_back({a, b, 1.0});
        }
        if (edges.size() > best.size()) {
            best = edges;
        }
        if (clean) {
            return edges;
        }
    }
    return best;
}

} // namespace

Circuit gen_qaoa(std::uint32_t n, std::uint32_t layers, std::uint64_t seed, bool portfolio) {
    if (n < 3 || layers < 1) {
        throw std::invalid_argument("gen_qaoa: need n >= 3 and layers >= 1");
    }
    Rng rng = Rng::derive(seed, (std::uint64_t{n} << 16) | (layers << 1) | (portfolio ? 1 : 0));

    std::vector<WeightedEdge> edges;
    if (portfolio) {
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = i + 1; j < n; ++j) {
                edges.push_back({i, j, 0.05 + 0.45 * rng.uniform()});
            }
        }
    } else {
        edges = three_regular_like(n, rng);
    }

    Circuit c(n, portfolio ? "portfolioqaoa" : "qaoa");
    for (std::uint32_t q = 0; q < n; ++q) {
        c.add(Gate::h(q));
    }
    for (std::uint32_t l = 0; l < layers; ++l) {
        const double gamma = rng.uniform() * kPi;
        const double beta = rng.uniform() * kPi;
        for (const auto& e : edges) {
            c.add(Gate::rzz(gamma * e.w, e.a, e.b));
        }
        for (std::uint32_t q = 0; q < n; ++q) {
            emit_rx(c, 2.0 * beta, q);
        }
    }
    return c;
}

Circuit gen_random_parametric(std::uint32_t n, std::uint64_t seed) {
    if (n < 2) {
        throw std::invalid_argument("gen_random_parametric: need at least 2 qubits");
    }
    Rng rng = Rng::derive(seed, (std::uint64_t{n} << 16) | 2);
    Circuit c(n, "random_parametric");
    for (std::uint32_t q = 0; q < n; ++q) {
        c.add(Gate::h(q));
    }
    constexpr GateKind kinds[6] = {GateKind::CRZ, GateKind::CRX, GateKind::CRY,
                                   GateKind::CP,  GateKind::RZZ, GateKind::CX};
    for (std::uint32_t g = 0; g < 4 * n; ++g) {
        const GateKind kind = kinds[rng.uniform_int(6)];
        const auto a = static_cast<std::uint32_t>(rng.uniform_int(n));
        auto b = static_cast<std::uint32_t>(rng.uniform_int(n - 1));
        if (b >= a) {
            ++b;
        }
        if (kind == GateKind::CX) {
            c.add(Gate::cx(a, b));
        } else {
            c.add(Gate::two_qubit(kind, a, b, kPi - 2.0 * kPi * rng.uniform()));
        }
    }
    return c;
}

std::string_view family_name(BenchmarkFamily f) {
    switch (f) {
    case BenchmarkFamily::Qft:
        return "qft";
    case BenchmarkFamily::QftEntangled:
        return "qft_entangled";
    case BenchmarkFamily::AmplitudeEstimation:
        return "amplitude_estimation";
    case BenchmarkFamily::Qaoa:
        return "qaoa";
    case BenchmarkFamily::PortfolioQaoa:
        return "portfolio_qaoa";
    case BenchmarkFamily::RandomParametric:
        return "random_parametric";
    }
    return "?";
}

std::optional<BenchmarkFamily> family_from_name(std::string_view name) {
    if (name == "qft") {
        return BenchmarkFamily::Qft;
    }
    if (name == "qft_entangled" || name == "qftentangled") {
        return BenchmarkFamily::QftEntangled;
    }
    if (name == "amplitude_estimation" || name == "ae") {
        return BenchmarkFamily::AmplitudeEstimation;
    }
    if (name == "qaoa") {
        return BenchmarkFamily::Qaoa;
    }
    if (name == "portfolio_qaoa" || name == "portfolioqaoa") {
        return BenchmarkFamily::PortfolioQaoa;
    }
    if (name == "random_parametric") {
        return BenchmarkFamily::RandomParametric;
    }
    return std::nullopt;
}

Circuit gen_family(BenchmarkFamily family, std::uint32_t width, std::uint64_t seed,
                   std::uint32_t qaoa_layers) {
    switch (family) {
    case BenchmarkFamily::Qft:
        return gen_qft(width, false);
    case BenchmarkFamily::QftEntangled:
        return gen_qft(width, true);
    case BenchmarkFamily::AmplitudeEstimation:
        return gen_amplitude_estimation(width);
    case BenchmarkFamily::Qaoa:
        return gen_qaoa(width, qaoa_layers, seed, false);
    case BenchmarkFamily::PortfolioQaoa:
        return gen_qaoa(width, qaoa_layers, seed, true);
    case BenchmarkFamily::RandomParametric:
        return gen_random_parametric(width, seed);
    }
    throw std::invalid_argument("gen_family: unknown family");
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

double ExperimentCell::rel_cx_reduction() const {
    if (noisy.cx == 0) {
        return 0.0;
    }
    return (static_cast<double>(noisy.cx) - static_cast<double>(pruned.cx)) /
           static_cast<double>(noisy.cx);
}

double ExperimentCell::rel_fid_improvement() const {
    if (noisy.fidelity <= 0.0) {
        return 0.0;
    }
    return (pruned.fidelity - noisy.fidelity) / noisy.fidelity;
}

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    return Rng::splitmix64(x);
}

struct CellContext {
    const ExperimentConfig* config;
    Topology topo;
    NoiseModel noise;
    Statevector ideal;
    bool use_dm;
    std::uint64_t seed_base;
};

PipelineStats evaluate(const CellContext& ctx, const CompilationResult& result,
                       std::uint64_t mode_tag) {
    PipelineStats stats;
    stats.gates_total = count_gates(result.compiled);
    stats.cx = count_gates(result.compiled, GateKind::CX);
    stats.swaps_inserted = result.swaps_inserted;
    stats.gates_pruned = result.pruned_gates.size();
    if (ctx.use_dm) {
        const DensityMatrix rho = simulate_noisy_dm(result.compiled, ctx.noise);
        stats.fidelity = state_fidelity(ctx.ideal, rho, result.final_layout);
        stats.fid_stderr = 0.0;
    } else {
        const Statevector target =
            embed_ideal(ctx.ideal, result.final_layout, ctx.topo.num_physical());
        const TrajectoryEstimate est =
            simulate_noisy_traj(result.compiled, ctx.noise, ctx.config->shots,
                                mix_seed(ctx.seed_base, mode_tag), target);
        stats.fidelity = est.fidelity;
        stats.fid_stderr = est.std_error;
    }
    return stats;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.families.empty() || config.widths.empty()) {
        throw std::invalid_argument("run_experiment: families and widths must be non-empty");
    }
    ExperimentReport report;
    for (const BenchmarkFamily family : config.families) {
        for (const std::uint32_t width : config.widths) {
            const Circuit circuit = gen_family(family, width, config.seed, config.qaoa_layers);

            Topology topo = [&] {
                if (config.custom_num_qubits) {
                    return Topology(*config.custom_num_qubits, config.custom_edges);
                }
                if (config.grid) {
                    return make_grid(config.grid->first, config.grid->second);
                }
                return grid_for_width(width);
            }();
            if (width > topo.num_physical()) {
                throw std::invalid_argument("run_experiment: width exceeds the topology");
            }

            CostModelParams params;
            params.routing_overhead = config.routing_overhead;
            params.p2 = 0.0; // pruning is off in the unpruned pass

            CompilationResult noisy =
                compile_pipeline(circuit, topo, params, PipelineMode::Noisy);

            const std::size_t total_gates = count_gates(noisy.compiled);
            const double p2 = config.p2
                                  ? *config.p2
                                  : p2_heuristic(total_gates == 0 ? 1 : total_gates, width);

            NoiseModel noise;
            noise.p2 = p2;
            noise.dur_1q_s = config.dur_1q_s;
            noise.dur_2q_s = config.dur_2q_s;
            const double duration = circuit_duration(noisy.compiled, noise);
            const bool relax_on =
                config.relaxation && duration > 0.0 && !(config.p2 && *config.p2 == 0.0);
            if (relax_on) {
                const RelaxationTimes rt = relaxation_times(duration);
                noise.t1_s = rt.t1_s;
                noise.t2_s = rt.t2_s;
            } else {
                noise.t1_s = std::numeric_limits<double>::infinity();
                noise.t2_s = std::numeric_limits<double>::infinity();
            }
            noise.validate();

            params.p2 = p2;
            params.validate();
            CompilationResult pruned =
                compile_pipeline(circuit, topo, params, PipelineMode::Pruned);

            CellContext ctx{&config,
                            std::move(topo),
                            noise,
                            simulate_ideal(circuit),
                            /*use_dm=*/false,
                            0};
            ctx.use_dm = ctx.topo.num_physical() <= config.max_dm_qubits;
            ctx.seed_base = mix_seed(config.seed, mix_seed(static_cast<std::uint64_t>(family),
                                                           width));

            ExperimentCell cell;
            cell.family = std::string(family_name(family));
            cell.width = width;
            if (auto shape = ctx.topo.grid_shape()) {
                cell.rows = shape->first;
                cell.cols = shape->second;
            }
            cell.p2 = p2;
            cell.duration_s = duration;
            cell.t1_s = noise.t1_s;
            cell.t2_s = noise.t2_s;
            cell.engine = ctx.use_dm ? "dm" : "traj";
            cell.noisy = evaluate(ctx, noisy, 0);
            cell.pruned = evaluate(ctx, pruned, 1);

            if (config.baseline_ks) {
                for (const std::size_t k : *config.baseline_ks) {
                    const CompilationResult base =
                        compile_pipeline(circuit, ctx.topo, params, PipelineMode::Baseline, k);
                    BaselineCell bc;
                    bc.k = k;
                    bc.stats = evaluate(ctx, base, 2 + k);
                    cell.baselines.push_back(bc);
                }
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void csv_row(std::string& out, const ExperimentCell& cell, const char* mode, long k,
             const PipelineStats& s, bool is_pruned) {
    out += cell.family;
    out += ',';
    out += std::to_string(cell.width);
    out += ',';
    out += mode;
    out += ',';
    if (k >= 0) {
        out += std::to_string(k);
    }
    out += ',';
    out += std::to_string(s.gates_total);
    out += ',';
    out += std::to_string(s.cx);
    out += ',';
    out += std::to_string(s.swaps_inserted);
    out += ',';
    out += std::to_string(s.gates_pruned);
    out += ',';
    out += fmt6(cell.p2);
    out += ',';
    out += fmt6(s.fidelity);
    out += ',';
    out += fmt6(s.fid_stderr);
    out += ',';
    if (is_pruned) {
        out += fmt6(cell.rel_cx_reduction());
    }
    out += ',';
    if (is_pruned) {
        out += fmt6(cell.rel_fid_improvement());
    }
    out += '\n';
}

} // namespace

std::string ExperimentReport::to_csv() const {
    std::string out = "family,width,mode,k,gates,cx,swaps_inserted,gates_pruned,p2,"
                      "fidelity,fid_stderr,rel_cx_reduction,rel_fid_improvement\n";
    for (const auto& cell : cells) {
        csv_row(out, cell, "noisy", -1, cell.noisy, false);
        csv_row(out, cell, "pruned", -1, cell.pruned, true);
        for (const auto& bc : cell.baselines) {
            csv_row(out, cell, "baseline", static_cast<long>(bc.k), bc.stats, false);
        }
    }
    return out;
}

namespace {

using nlohmann::json;

json stats_to_json(const PipelineStats& s) {
    return json{{"gates", s.gates_total},          {"cx", s.cx},
                {"swaps_inserted", s.swaps_inserted}, {"gates_pruned", s.gates_pruned},
                {"fidelity", s.fidelity},          {"fid_stderr", s.fid_stderr}};
}

PipelineStats stats_from_json(const json& j) {
    PipelineStats s;
    s.gates_total = j.at("gates").get<std::size_t>();
    s.cx = j.at("cx").get<std::size_t>();
    s.swaps_inserted = j.at("swaps_inserted").get<std::uint32_t>();
    s.gates_pruned = j.at("gates_pruned").get<std::size_t>();
    s.fidelity = j.at("fidelity").get<double>();
    s.fid_stderr = j.at("fid_stderr").get<double>();
    return s;
}

} // namespace

std::string ExperimentReport::to_json_text() const {
    json out = json::array();
    for (const auto& cell : cells) {
        json jc{{"family", cell.family},
                {"width", cell.width},
                {"grid", {cell.rows, cell.cols}},
                {"p2", cell.p2},
                {"duration_s", cell.duration_s},
                {"t1_s", std::isfinite(cell.t1_s) ? json(cell.t1_s) : json()},
                {"t2_s", std::isfinite(cell.t2_s) ? json(cell.t2_s) : json()},
                {"engine", cell.engine},
                {"noisy", stats_to_json(cell.noisy)},
                {"pruned", stats_to_json(cell.pruned)},
                {"rel_cx_reduction", cell.rel_cx_reduction()},
                {"rel_fid_improvement", cell.rel_fid_improvement()}};
        json jb = json::array();
        for (const auto& bc : cell.baselines) {
            jb.push_back(json{{"k", bc.k}, {"stats", stats_to_json(bc.stats)}});
        }
        jc["baselines"] = jb;
        out.push_back(jc);
    }
    return out.dump(2);
}

ExperimentReport ExperimentReport::from_json_text(const std::string& text) {
    const json in = json::parse(text);
    ExperimentReport report;
    for (const auto& jc : in) {
        ExperimentCell cell;
        cell.family = jc.at("family").get<std::string>();
        cell.width = jc.at("width").get<std::uint32_t>();
        cell.rows = jc.at("grid")[0].get<std::uint32_t>();
        cell.cols = jc.at("grid")[1].get<std::uint32_t>();
        cell.p2 = jc.at("p2").get<double>();
        cell.duration_s = jc.at("duration_s").get<double>();
        cell.t1_s = jc.at("t1_s").is_null() ? std::numeric_limits<double>::infinity()
                                            : jc.at("t1_s").get<double>();
        cell.t2_s = jc.at("t2_s").is_null() ? std::numeric_limits<double>::infinity()
                                            : jc.at("t2_s").get<double>();
        cell.engine = jc.at("engine").get<std::string>();
        cell.noisy = stats_from_json(jc.at("noisy"));
        cell.pruned = stats_from_json(jc.at("pruned"));
        for (const auto& jb : jc.at("baselines")) {
            BaselineCell bc;
            bc.k = jb.at("k").get<std::size_t>();
            bc.stats = stats_from_json(jb.at("stats"));
            cell.baselines.push_back(bc);
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json in = json::parse(text);
    ExperimentConfig cfg;

    if (in.contains("families")) {
        for (const auto& f : in.at("families")) {
            const auto fam = family_from_name(f.get<std::string>());
            if (!fam) {
                throw std::invalid_argument("config: unknown family '" +
                                            f.get<std::string>() + "'");
            }
            cfg.families.push_back(*fam);
        }
    } else if (in.contains("family")) {
        const auto fam = family_from_name(in.at("family").get<std::string>());
        if (!fam) {
            throw std::invalid_argument("config: unknown family");
        }
        cfg.families.push_back(*fam);
    }
    cfg.widths = in.at("widths").get<std::vector<std::uint32_t>>();

    if (in.contains("topology")) {
        const json& t = in.at("topology");
        if (t.contains("grid")) {
            cfg.grid = {t.at("grid")[0].get<std::uint32_t>(),
                        t.at("grid")[1].get<std::uint32_t>()};
        }
        if (t.contains("edges")) {
            cfg.custom_num_qubits = t.at("num_qubits").get<std::uint32_t>();
            for (const auto& e : t.at("edges")) {
                cfg.custom_edges.emplace_back(e[0].get<std::uint32_t>(),
                                              e[1].get<std::uint32_t>());
            }
        }
    }
    if (in.contains("p2")) {
        cfg.p2 = in.at("p2").get<double>();
    }
    if (in.contains("routing_overhead")) {
        cfg.routing_overhead = in.at("routing_overhead").get<double>();
    }
    if (in.contains("shots")) {
        cfg.shots = in.at("shots").get<std::uint64_t>();
    }
    if (in.contains("seed")) {
        cfg.seed = in.at("seed").get<std::uint64_t>();
    }
    if (in.contains("baseline_ks")) {
        cfg.baseline_ks = in.at("baseline_ks").get<std::vector<std::size_t>>();
    }
    if (in.contains("qaoa_layers")) {
        cfg.qaoa_layers = in.at("qaoa_layers").get<std::uint32_t>();
    }
    if (in.contains("relaxation")) {
        cfg.relaxation = in.at("relaxation").get<bool>();
    }
    if (in.contains("dur_1q_s")) {
        cfg.dur_1q_s = in.at("dur_1q_s").get<double>();
    }
    if (in.contains("dur_2q_s")) {
        cfg.dur_2q_s = in.at("dur_2q_s").get<double>();
    }
    if (in.contains("max_dm_qubits")) {
        cfg.max_dm_qubits = in.at("max_dm_qubits").get<std::uint32_t>();
    }
    return cfg;
}

std::string ExperimentConfig::to_json_text() const {
    json out;
    json fams = json::array();
    for (const auto f : families) {
        fams.push_back(std::string(family_name(f)));
    }
    out["families"] = fams;
    out["widths"] = widths;
    if (grid) {
        out["topology"] = json{{"grid", {grid->first, grid->second}}};
    } else if (custom_num_qubits) {
        json edges = json::array();
        for (const auto& e : custom_edges) {
            edges.push_back({e.first, e.second});
        }
        out["topology"] = json{{"num_qubits", *custom_num_qubits}, {"edges", edges}};
    }
    if (p2) {
        out["p2"] = *p2;
    }
    out["routing_overhead"] = routing_overhead;
    out["shots"] = shots;
    out["seed"] = seed;
    if (baseline_ks) {
        out["baseline_ks"] = *baseline_ks;
    }
    out["qaoa_layers"] = qaoa_layers;
    out["relaxation"] = relaxation;
    out["dur_1q_s"] = dur_1q_s;
    out["dur_2q_s"] = dur_2q_s;
    out["max_dm_qubits"] = max_dm_qubits;
    return out.dump(2);
}

} // namespace qprune
