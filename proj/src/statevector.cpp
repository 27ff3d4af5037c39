#include "qprune/simulator.hpp"

#include <cmath>
#include <stdexcept>

namespace qprune {

namespace {

constexpr std::uint32_t kMaxStatevectorQubits = 20;

/// Inserts a zero bit at position `pos`, shifting higher bits up.
inline std::size_t insert_zero(std::size_t x, std::uint32_t pos) {
    const std::size_t low = x & ((std::size_t{1} << pos) - 1);
    return ((x >> pos) << (pos + 1)) | low;
}

} // namespace

Statevector::Statevector(std::uint32_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits > kMaxStatevectorQubits) {
        throw std::invalid_argument("Statevector: width limit is 20 qubits");
    }
    amp_.assign(std::size_t{1} << num_qubits, cplx{});
    amp_[0] = 1.0;
}

void Statevector::apply_unitary1(const CMatrix& u, std::uint32_t q) {
    if (u.dim() != 2 || q >= num_qubits_) {
        throw std::invalid_argument("apply_unitary1: bad arguments");
    }
    const std::size_t n = amp_.size();
    const std::size_t mask = std::size_t{1} << q;
    const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const std::size_t i0 = insert_zero(k, q);
        const std::size_t i1 = i0 | mask;
        const cplx a0 = amp_[i0];
        const cplx a1 = amp_[i1];
        amp_[i0] = u00 * a0 + u01 * a1;
        amp_[i1] = u10 * a0 + u11 * a1;
    }
}

void Statevector::apply_unitary2(const CMatrix& u, std::uint32_t a, std::uint32_t b) {
    if (u.dim() != 4 || a >= num_qubits_ || b >= num_qubits_ || a == b) {
        throw std::invalid_argument("apply_unitary2: bad arguments");
    }
    const std::size_t n = amp_.size();
    const std::size_t amask = std::size_t{1} << a;
    const std::size_t bmask = std::size_t{1} << b;
    const std::uint32_t qlow = std::min(a, b);
    const std::uint32_t qhigh = std::max(a, b);
    for (std::size_t k = 0; k < n / 4; ++k) {
        const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh);
        // local basis |q_a q_b>: index (bit_a << 1) | bit_b
        const std::size_t idx[4] = {base, base | bmask, base | amask, base | amask | bmask};
        cplx v[4];
        for (int i = 0; i < 4; ++i) {
            v[i] = amp_[idx[i]];
        }
        for (int r = 0; r < 4; ++r) {
            cplx acc{};
            for (int c = 0; c < 4; ++c) {
                acc += u(r, c) * v[c];
            }
            amp_[idx[r]] = acc;
        }
    }
}

void Statevector::apply(const Gate& g) {
    const std::size_t n = amp_.size();
    switch (g.kind) {
    case GateKind::ID:
        return;
    case GateKind::X: {
        const std::size_t mask = std::size_t{1} << g.q0;
        for (std::size_t k = 0; k < n / 2; ++k) {
            const std::size_t i0 = insert_zero(k, g.q0);
            std::swap(amp_[i0], amp_[i0 | mask]);
        }
        return;
    }
    case GateKind::SX: {
        const std::size_t mask = std::size_t{1} << g.q0;
        const cplx p(0.5, 0.5);
        const cplx m(0.5, -0.5);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const std::size_t i0 = insert_zero(k, g.q0);
            const std::size_t i1 = i0 | mask;
            const cplx a0 = amp_[i0];
            const cplx a1 = amp_[i1];
            amp_[i0] = p * a0 + m * a1;
            amp_[i1] = m * a0 + p * a1;
        }
        return;
    }
    case GateKind::H: {
        const std::size_t mask = std::size_t{1} << g.q0;
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const std::size_t i0 = insert_zero(k, g.q0);
            const std::size_t i1 = i0 | mask;
            const cplx a0 = amp_[i0];
            const cplx a1 = amp_[i1];
            amp_[i0] = inv_sqrt2 * (a0 + a1);
            amp_[i1] = inv_sqrt2 * (a0 - a1);
        }
        return;
    }
    case GateKind::RZ: {
        const std::size_t mask = std::size_t{1} << g.q0;
        const cplx em = std::polar(1.0, -g.angle / 2.0);
        const cplx ep = std::polar(1.0, g.angle / 2.0);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const std::size_t i0 = insert_zero(k, g.q0);
            amp_[i0] *= em;
            amp_[i0 | mask] *= ep;
        }
        return;
    }
    case GateKind::CX: {
        const std::size_t cmask = std::size_t{1} << g.q0;
        const std::size_t tmask = std::size_t{1} << g.q1;
        const std::uint32_t qlow = std::min(g.q0, g.q1);
        const std::uint32_t qhigh = std::max(g.q0, g.q1);
        for (std::size_t k = 0; k < n / 4; ++k) {
            const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh) | cmask;
            std::swap(amp_[base], amp_[base | tmask]);
        }
        return;
    }
    case GateKind::SWAP: {
        const std::size_t amask = std::size_t{1} << g.q0;
        const std::size_t bmask = std::size_t{1} << g.q1;
        const std::uint32_t qlow = std::min(g.q0, g.q1);
        const std::uint32_t qhigh = std::max(g.q0, g.q1);
        for (std::size_t k = 0; k < n / 4; ++k) {
            const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh);
            std::swap(amp_[base | amask], amp_[base | bmask]);
        }
        return;
    }
    case GateKind::CP: {
        const std::size_t both = (std::size_t{1} << g.q0) | (std::size_t{1} << g.q1);
        const cplx ph = std::polar(1.0, g.angle);
        const std::uint32_t qlow = std::min(g.q0, g.q1);
        const std::uint32_t qhigh = std::max(g.q0, g.q1);
        for (std::size_t k = 0; k < n / 4; ++k) {
            const std::size_t i = insert_zero(insert_zero(k, qlow), qhigh) | both;
            amp_[i] *= ph;
        }
        return;
    }
    case GateKind::CRZ: {
        const std::size_t cmask = std::size_t{1} << g.q0;
        const std::size_t tmask = std::size_t{1} << g.q1;
        const cplx em = std::polar(1.0, -g.angle / 2.0);
        const cplx ep = std::polar(1.0, g.angle / 2.0);
        const std::uint32_t qlow = std::min(g.q0, g.q1);
        const std::uint32_t qhigh = std::max(g.q0, g.q1);
        for (std::size_t k = 0; k < n / 4; ++k) {
            const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh) | cmask;
            amp_[base] *= em;
            amp_[base | tmask] *= ep;
        }
        return;
    }
    case GateKind::RZZ: {
        const std::size_t amask = std::size_t{1} << g.q0;
        const std::size_t bmask = std::size_t{1} << g.q1;
        const cplx em = std::polar(1.0, -g.angle / 2.0);
        const cplx ep = std::polar(1.0, g.angle / 2.0);
        const std::uint32_t qlow = std::min(g.q0, g.q1);
        const std::uint32_t qhigh = std::max(g.q0, g.q1);
        for (std::size_t k = 0; k < n / 4; ++k) {
            const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh);
            amp_[base] *= em;
            amp_[base | bmask] *= ep;
            amp_[base | amask] *= ep;
            amp_[base | amask | bmask] *= em;
        }
        return;
    }
    case GateKind::CRX:
    case GateKind::CRY: {
        // rotation on the target conditioned on the control
        const std::size_t cmask = std::size_t{1} << g.q0;
        const std::size_t tmask = std::size_t{1} << g.q1;
        const double c = std::cos(g.angle / 2.0);
        const double s = std::sin(g.angle / 2.0);
        const cplx u00 = c;
        const cplx u01 = g.kind == GateKind::CRX ? cplx(0.0, -s) : cplx(-s, 0.0);
        const cplx u10 = g.kind == GateKind::CRX ? cplx(0.0, -s) : cplx(s, 0.0);
        const cplx u11 = c;
        const std::uint32_t qlow = std::min(g.q0, g.q1);
        const std::uint32_t qhigh = std::max(g.q0, g.q1);
        for (std::size_t k = 0; k < n / 4; ++k) {
            const std::size_t i0 = insert_zero(insert_zero(k, qlow), qhigh) | cmask;
            const std::size_t i1 = i0 | tmask;
            const cplx a0 = amp_[i0];
            const cplx a1 = amp_[i1];
            amp_[i0] = u00 * a0 + u01 * a1;
            amp_[i1] = u10 * a0 + u11 * a1;
        }
        return;
    }
    }
    throw std::invalid_argument("Statevector::apply: unknown kind");
}

cplx Statevector::inner(const Statevector& other) const {
    if (num_qubits_ != other.num_qubits_) {
        throw std::invalid_argument("Statevector::inner: width mismatch");
    }
    cplx acc{};
    for (std::size_t i = 0; i < amp_.size(); ++i) {
        acc += std::conj(amp_[i]) * other.amp_[i];
    }
    return acc;
}

double Statevector::norm_sqr() const {
    double acc = 0.0;
    for (const cplx& a : amp_) {
        acc += std::norm(a);
    }
    return acc;
}

void Statevector::normalize() {
    const double n = std::sqrt(norm_sqr());
    if (n == 0.0) {
        throw std::runtime_error("Statevector::normalize: zero state");
    }
    for (cplx& a : amp_) {
        a /= n;
    }
}

double Statevector::pop1(std::uint32_t q) const {
    const std::size_t mask = std::size_t{1} << q;
    double acc = 0.0;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
        if (i & mask) {
            acc += std::norm(amp_[i]);
        }
    }
    return acc;
}

Statevector simulate_ideal(const Circuit& circuit) {
    if (circuit.num_qubits() > kMaxStatevectorQubits) {
        throw std::invalid_argument("simulate_ideal: width limit is 20 qubits");
    }
    Statevector psi(circuit.num_qubits());
    for (const auto& g : circuit) {
        psi.apply(g);
    }
    return psi;
}

Statevector embed_ideal(const Statevector& ideal, const Layout& final_layout,
                        std::uint32_t num_physical) {
    const std::uint32_t n = ideal.num_qubits();
    if (num_physical < n || final_layout.size() != num_physical) {
        throw std::invalid_argument("embed_ideal: layout/width mismatch");
    }
    Statevector out(num_physical);
    out.amplitudes()[0] = 0.0;
    for (std::size_t x = 0; x < ideal.dim(); ++x) {
        std::size_t z = 0;
        for (std::uint32_t l = 0; l < n; ++l) {
            if (x & (std::size_t{1} << l)) {
                z |= std::size_t{1} << final_layout.phys_of(l);
            }
        }
        out.amplitudes()[z] = ideal.amplitudes()[x];
    }
    return out;
}

double state_fidelity(const Statevector& ideal, const Statevector& noisy,
                      const Layout& final_layout) {
    const Statevector target = embed_ideal(ideal, final_layout, noisy.num_qubits());
    const double f = std::norm(target.inner(noisy));
    return f < 0.0 ? 0.0 : f;
}

double state_fidelity(const Statevector& ideal, const DensityMatrix& noisy,
                      const Layout& final_layout) {
    const Statevector target = embed_ideal(ideal, final_layout, noisy.num_qubits());
    return noisy.expectation(target);
}

double state_fidelity(const Statevector& ideal, const Statevector& noisy) {
    if (ideal.num_qubits() != noisy.num_qubits()) {
        throw std::invalid_argument("state_fidelity: width mismatch");
    }
    return std::norm(ideal.inner(noisy));
}

double state_fidelity(const Statevector& ideal, const DensityMatrix& noisy) {
    if (ideal.num_qubits() != noisy.num_qubits()) {
        throw std::invalid_argument("state_fidelity: width mismatch");
    }
    return noisy.expectation(ideal);
}

double circuit_duration(const Circuit& circuit, const NoiseModel& noise) {
    double total = 0.0;
    for (const auto& g : circuit) {
        if (!is_basis_gate(g.kind)) {
            throw std::invalid_argument("circuit_duration: circuit is not in basis gates");
        }
        total += g.kind == GateKind::CX ? noise.dur_2q_s : noise.dur_1q_s;
    }
    return total;
}

} // namespace qprune
