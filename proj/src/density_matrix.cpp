#include "qprune/simulator.hpp"

#include <cmath>
#include <stdexcept>

namespace qprune {

namespace {
constexpr std::uint32_t kMaxDmQubits = 10;

inline std::size_t insert_zero(std::size_t x, std::uint32_t pos) {
    const std::size_t low = x & ((std::size_t{1} << pos) - 1);
    return ((x >> pos) << (pos + 1)) | low;
}
} // namespace

void NoiseModel::validate() const {
    if (!(p2 >= 0.0 && p2 <= 1.0)) {
        throw std::invalid_argument("NoiseModel: p2 must lie in [0, 1]");
    }
    if (!(t1_s > 0.0)) {
        throw std::invalid_argument("NoiseModel: t1 must be positive");
    }
    if (!(t2_s > 0.0 && t2_s <= 2.0 * t1_s)) {
        throw std::invalid_argument("NoiseModel: t2 must lie in (0, 2*t1]");
    }
    if (!(dur_1q_s >= 0.0) || !(dur_2q_s >= 0.0)) {
        throw std::invalid_argument("NoiseModel: durations must be non-negative");
    }
}

double NoiseModel::gamma_2q() const {
    return 1.0 - std::exp(-dur_2q_s / t1_s);
}

double NoiseModel::dephase_2q() const {
    // pure-dephasing rate on top of the damping-induced decay; non-negative
    // exactly when t2 <= 2 t1
    const double rate = 1.0 / t2_s - 1.0 / (2.0 * t1_s);
    return (1.0 - std::exp(-dur_2q_s * rate)) / 2.0;
}

DensityMatrix::DensityMatrix(std::uint32_t num_qubits)
    : num_qubits_(num_qubits), dim_(std::size_t{1} << num_qubits) {
    if (num_qubits > kMaxDmQubits) {
        throw std::invalid_argument("DensityMatrix: width limit is 10 qubits");
    }
    a_.assign(dim_ * dim_, cplx{});
    a_[0] = 1.0;
}

DensityMatrix DensityMatrix::from_pure(const Statevector& psi) {
    DensityMatrix rho(psi.num_qubits());
    const auto& amp = psi.amplitudes();
    for (std::size_t r = 0; r < rho.dim_; ++r) {
        for (std::size_t c = 0; c < rho.dim_; ++c) {
            rho.a_[r * rho.dim_ + c] = amp[r] * std::conj(amp[c]);
        }
    }
    return rho;
}

namespace {

/// rho -> (U rho) for a one-qubit U acting on the row index.
void rows_1q(std::vector<cplx>& a, std::size_t dim, const CMatrix& u, std::uint32_t q) {
    const std::size_t mask = std::size_t{1} << q;
    const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    for (std::size_t k = 0; k < dim / 2; ++k) {
        const std::size_t r0 = insert_zero(k, q);
        const std::size_t r1 = r0 | mask;
        cplx* row0 = &a[r0 * dim];
        cplx* row1 = &a[r1 * dim];
        for (std::size_t c = 0; c < dim; ++c) {
            const cplx x = row0[c];
            const cplx y = row1[c];
            row0[c] = u00 * x + u01 * y;
            row1[c] = u10 * x + u11 * y;
        }
    }
}

/// rho -> (rho U^T-conj) for a one-qubit U acting on the column index,
/// i.e. the V = conj(U) update completing rho -> U rho U†.
void cols_1q(std::vector<cplx>& a, std::size_t dim, const CMatrix& u, std::uint32_t q) {
    const std::size_t mask = std::size_t{1} << q;
    const cplx v00 = std::conj(u(0, 0)), v01 = std::conj(u(0, 1));
    const cplx v10 = std::conj(u(1, 0)), v11 = std::conj(u(1, 1));
    for (std::size_t r = 0; r < dim; ++r) {
        cplx* row = &a[r * dim];
        for (std::size_t k = 0; k < dim / 2; ++k) {
            const std::size_t c0 = insert_zero(k, q);
            const std::size_t c1 = c0 | mask;
            const cplx x = row[c0];
            const cplx y = row[c1];
            row[c0] = v00 * x + v01 * y;
            row[c1] = v10 * x + v11 * y;
        }
    }
}

void rows_2q(std::vector<cplx>& a, std::size_t dim, const CMatrix& u, std::uint32_t qa,
             std::uint32_t qb) {
    const std::size_t amask = std::size_t{1} << qa;
    const std::size_t bmask = std::size_t{1} << qb;
    const std::uint32_t qlow = std::min(qa, qb);
    const std::uint32_t qhigh = std::max(qa, qb);
    for (std::size_t k = 0; k < dim / 4; ++k) {
        const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh);
        const std::size_t idx[4] = {base, base | bmask, base | amask, base | amask | bmask};
        for (std::size_t c = 0; c < dim; ++c) {
            cplx v[4];
            for (int i = 0; i < 4; ++i) {
                v[i] = a[idx[i] * dim + c];
            }
            for (int r = 0; r < 4; ++r) {
                cplx acc{};
                for (int j = 0; j < 4; ++j) {
                    acc += u(r, j) * v[j];
                }
                a[idx[r] * dim + c] = acc;
            }
        }
    }
}

void cols_2q(std::vector<cplx>& a, std::size_t dim, const CMatrix& u, std::uint32_t qa,
             std::uint32_t qb) {
    const std::size_t amask = std::size_t{1} << qa;
    const std::size_t bmask = std::size_t{1} << qb;
    const std::uint32_t qlow = std::min(qa, qb);
    const std::uint32_t qhigh = std::max(qa, qb);
    for (std::size_t r = 0; r < dim; ++r) {
        cplx* row = &a[r * dim];
        for (std::size_t k = 0; k < dim / 4; ++k) {
            const std::size_t base = insert_zero(insert_zero(k, qlow), qhigh);
            const std::size_t idx[4] = {base, base | bmask, base | amask, base | amask | bmask};
            cplx v[4];
            for (int i = 0; i < 4; ++i) {
                v[i] = row[idx[i]];
            }
            for (int rr = 0; rr < 4; ++rr) {
                cplx acc{};
                for (int j = 0; j < 4; ++j) {
                    acc += std::conj(u(rr, j)) * v[j];
                }
                row[idx[rr]] = acc;
            }
        }
    }
}

} // namespace

void DensityMatrix::apply(const Gate& g) {
    if (g.kind == GateKind::ID) {
        return;
    }
    if (is_two_qubit(g.kind)) {
        const CMatrix u = gate_unitary(g);
        rows_2q(a_, dim_, u, g.q0, g.q1);
        cols_2q(a_, dim_, u, g.q0, g.q1);
    } else {
        const CMatrix u = gate_unitary(g);
        rows_1q(a_, dim_, u, g.q0);
        cols_1q(a_, dim_, u, g.q0);
    }
}

void DensityMatrix::depolarize_pair(double p, std::uint32_t a, std::uint32_t b) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("depolarize_pair: p out of range");
    }
    if (a >= num_qubits_ || b >= num_qubits_ || a == b) {
        throw std::invalid_argument("depolarize_pair: bad qubits");
    }
    if (p == 0.0) {
        return;
    }
    const std::size_t amask = std::size_t{1} << a;
    const std::size_t bmask = std::size_t{1} << b;
    const std::uint32_t qlow = std::min(a, b);
    const std::uint32_t qhigh = std::max(a, b);
    const std::size_t sub = dim_ / 4;

    // partial trace over the pair
    std::vector<cplx> sigma(sub * sub, cplx{});
    for (std::size_t kr = 0; kr < sub; ++kr) {
        const std::size_t rbase = insert_zero(insert_zero(kr, qlow), qhigh);
        for (std::size_t kc = 0; kc < sub; ++kc) {
            const std::size_t cbase = insert_zero(insert_zero(kc, qlow), qhigh);
            cplx acc{};
            acc += a_[rbase * dim_ + cbase];
            acc += a_[(rbase | bmask) * dim_ + (cbase | bmask)];
            acc += a_[(rbase | amask) * dim_ + (cbase | amask)];
            acc += a_[(rbase | amask | bmask) * dim_ + (cbase | amask | bmask)];
            sigma[kr * sub + kc] = acc;
        }
    }

    // rho -> (1-p) rho + (p/4) sigma (x) I on the pair
    const double keep = 1.0 - p;
    const double mix = p / 4.0;
    for (std::size_t kr = 0; kr < sub; ++kr) {
        const std::size_t rbase = insert_zero(insert_zero(kr, qlow), qhigh);
        for (std::size_t kc = 0; kc < sub; ++kc) {
            const std::size_t cbase = insert_zero(insert_zero(kc, qlow), qhigh);
            const cplx add = mix * sigma[kr * sub + kc];
            for (const std::size_t pairbits :
                 {std::size_t{0}, bmask, amask, amask | bmask}) {
                cplx& e = a_[(rbase | pairbits) * dim_ + (cbase | pairbits)];
                e = keep * e + add;
            }
        }
    }
    // off-diagonal-in-pair entries only shrink
    for (std::size_t r = 0; r < dim_; ++r) {
        const std::size_t rp = r & (amask | bmask);
        for (std::size_t c = 0; c < dim_; ++c) {
            if ((c & (amask | bmask)) != rp) {
                a_[r * dim_ + c] *= keep;
            }
        }
    }
}

void DensityMatrix::thermal_relax(std::uint32_t q, double gamma, double pz) {
    if (q >= num_qubits_) {
        throw std::invalid_argument("thermal_relax: bad qubit");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0) || !(pz >= 0.0 && pz <= 0.5)) {
        throw std::invalid_argument("thermal_relax: parameters out of range");
    }
    if (gamma == 0.0 && pz == 0.0) {
        return;
    }
    const std::size_t mask = std::size_t{1} << q;
    const double keep = 1.0 - gamma;
    // off-diagonal factor: sqrt(1-gamma) from damping, (1-2 pz) from dephasing
    const double od = std::sqrt(keep) * (1.0 - 2.0 * pz);
    for (std::size_t kr = 0; kr < dim_ / 2; ++kr) {
        const std::size_t r0 = insert_zero(kr, q);
        const std::size_t r1 = r0 | mask;
        for (std::size_t kc = 0; kc < dim_ / 2; ++kc) {
            const std::size_t c0 = insert_zero(kc, q);
            const std::size_t c1 = c0 | mask;
            cplx& e00 = a_[r0 * dim_ + c0];
            cplx& e01 = a_[r0 * dim_ + c1];
            cplx& e10 = a_[r1 * dim_ + c0];
            cplx& e11 = a_[r1 * dim_ + c1];
            e00 += gamma * e11;
            e11 *= keep;
            e01 *= od;
            e10 *= od;
        }
    }
}

cplx DensityMatrix::trace() const {
    cplx acc{};
    for (std::size_t i = 0; i < dim_; ++i) {
        acc += a_[i * dim_ + i];
    }
    return acc;
}

double DensityMatrix::hermiticity_error() const {
    double m = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = r; c < dim_; ++c) {
            m = std::max(m, std::abs(a_[r * dim_ + c] - std::conj(a_[c * dim_ + r])));
        }
    }
    return m;
}

double DensityMatrix::expectation(const Statevector& phi) const {
    if (phi.num_qubits() != num_qubits_) {
        throw std::invalid_argument("DensityMatrix::expectation: width mismatch");
    }
    const auto& v = phi.amplitudes();
    cplx acc{};
    for (std::size_t r = 0; r < dim_; ++r) {
        cplx rowdot{};
        const cplx* row = &a_[r * dim_];
        for (std::size_t c = 0; c < dim_; ++c) {
            rowdot += row[c] * v[c];
        }
        acc += std::conj(v[r]) * rowdot;
    }
    const double f = acc.real();
    return f < 0.0 ? 0.0 : f;
}

DensityMatrix simulate_noisy_dm(const Circuit& circuit, const NoiseModel& noise) {
    noise.validate();
    if (circuit.num_qubits() > kMaxDmQubits) {
        throw std::invalid_argument("simulate_noisy_dm: width limit is 10 qubits");
    }
    const double gamma = noise.gamma_2q();
    const double pz = noise.dephase_2q();
    DensityMatrix rho(circuit.num_qubits());
    for (const auto& g : circuit) {
        if (!is_basis_gate(g.kind)) {
            throw std::invalid_argument("simulate_noisy_dm: circuit is not in basis gates");
        }
        rho.apply(g);
        if (g.kind == GateKind::CX) {
            rho.depolarize_pair(noise.p2, g.q0, g.q1);
            rho.thermal_relax(g.q0, gamma, pz);
            rho.thermal_relax(g.q1, gamma, pz);
        }
    }
    return rho;
}

} // namespace qprune
