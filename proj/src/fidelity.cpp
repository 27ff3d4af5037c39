#include "qprune/fidelity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qprune {

void CostModelParams::validate() const {
    if (!(p2 >= 0.0 && p2 < 1.0)) {
        throw std::invalid_argument("CostModelParams: p2 must lie in [0, 1)");
    }
    if (!(routing_overhead >= 1.0)) {
        throw std::invalid_argument("CostModelParams: routing_overhead must be >= 1");
    }
}

double wrap_angle(double theta) {
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("wrap_angle: angle must be finite");
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t > std::numbers::pi) {
        t -= two_pi;
    } else if (t <= -std::numbers::pi) {
        t += two_pi;
    }
    return t;
}

double rotation_fidelity_bound(double theta) {
    const double t = wrap_angle(theta);
    const double c = std::cos(t / 2.0);
    return c * c;
}

double swap_fidelity(const CostModelParams& params, std::uint32_t d) {
    params.validate();
    if (d == 0) {
        return 1.0;
    }
    // Overhead-corrected distance, then SWAPs per qubit when both endpoints
    // travel to the middle of the path. Both ceilings are conservative.
    const double d_eff = std::ceil(params.routing_overhead * static_cast<double>(d));
    const double swaps_per_qubit = std::ceil(d_eff / 2.0);
    const double g = std::pow(1.0 - params.p2, 3.0 * swaps_per_qubit);
    const double f = g + (1.0 - g) / 4.0;
    return f * f;
}

bool should_prune(const CostModelParams& params, double theta, std::uint32_t d) {
    return swap_fidelity(params, d) < rotation_fidelity_bound(theta);
}

double p2_heuristic(std::uint64_t gate_count, std::uint64_t qubit_count) {
    if (gate_count == 0 || qubit_count == 0) {
        throw std::invalid_argument("p2_heuristic: counts must be positive");
    }
    const double ratio = static_cast<double>(gate_count) / static_cast<double>(qubit_count);
    const double raw = 1.0 / (ratio * ratio);
    // the heuristic exceeds the physical range for trivially small circuits
    constexpr double cap = 0.5;
    return raw < cap ? raw : cap;
}

RelaxationTimes relaxation_times(double circuit_duration_s) {
    if (!(circuit_duration_s > 0.0)) {
        throw std::invalid_argument("relaxation_times: duration must be positive");
    }
    const double t = 2.0 * circuit_duration_s;
    return {t, t};
}

} // namespace qprune
