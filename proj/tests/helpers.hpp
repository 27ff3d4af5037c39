#pragma once

// Shared test oracles. These deliberately avoid the library's simulation
// kernels: unitaries are assembled by dense matrix embedding so that
// routing, decomposition and simulator results can be checked against an
// independent computation path.

#include "qprune/circuit.hpp"
#include "qprune/compiler.hpp"
#include "qprune/linalg.hpp"
#include "qprune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace qprune::test {

/// Embeds a one-qubit unitary acting on qubit q into the full 2^n space
/// (qubit q is bit q of the index).
inline CMatrix embed1(const CMatrix& u, std::uint32_t q, std::uint32_t n) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t mask = std::size_t{1} << q;
    CMatrix out(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~mask) != (c & ~mask)) {
                continue;
            }
            out(r, c) = u((r & mask) ? 1 : 0, (c & mask) ? 1 : 0);
        }
    }
    return out;
}

/// Embeds a two-qubit unitary on (a, b); local basis index (bit_a << 1) | bit_b.
inline CMatrix embed2(const CMatrix& u, std::uint32_t a, std::uint32_t b, std::uint32_t n) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t amask = std::size_t{1} << a;
    const std::size_t bmask = std::size_t{1} << b;
    const std::size_t rest = ~(amask | bmask);
    CMatrix out(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & rest) != (c & rest)) {
                continue;
            }
            const std::size_t lr = ((r & amask) ? 2 : 0) | ((r & bmask) ? 1 : 0);
            const std::size_t lc = ((c & amask) ? 2 : 0) | ((c & bmask) ? 1 : 0);
            out(r, c) = u(lr, lc);
        }
    }
    return out;
}

/// Full unitary of a circuit by dense matrix products (oracle; n <= ~6).
inline CMatrix circuit_unitary(const Circuit& circuit) {
    const std::uint32_t n = circuit.num_qubits();
    CMatrix u = CMatrix::identity(std::size_t{1} << n);
    for (const auto& g : circuit) {
        const CMatrix gm = gate_unitary(g);
        const CMatrix full = is_two_qubit(g.kind) ? embed2(gm, g.q0, g.q1, n)
                                                  : embed1(gm, g.q0, n);
        u = full * u;
    }
    return u;
}

/// Permutation unitary of a logical->physical layout: P |x>_logical =
/// |z>_physical with bit sigma(l) of z equal to bit l of x.
inline CMatrix layout_unitary(const Layout& layout) {
    const std::uint32_t m = layout.size();
    const std::size_t dim = std::size_t{1} << m;
    CMatrix p(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        std::size_t z = 0;
        for (std::uint32_t l = 0; l < m; ++l) {
            if (x & (std::size_t{1} << l)) {
                z |= std::size_t{1} << layout.phys_of(l);
            }
        }
        p(z, x) = 1.0;
    }
    return p;
}

/// Random normalized state via the library's portable RNG.
inline std::vector<cplx> random_state(std::uint32_t n, Rng& rng) {
    std::vector<cplx> v(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& a : v) {
        a = cplx(rng.normal(), rng.normal());
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : v) {
        a /= norm;
    }
    return v;
}

/// Eigenvalues of a Hermitian complex matrix via cyclic Jacobi on the real
/// symmetric embedding [[Re, -Im], [Im, Re]] (each eigenvalue doubled).
inline std::vector<double> hermitian_eigenvalues(const CMatrix& h) {
    const std::size_t n = h.dim();
    const std::size_t m = 2 * n;
    std::vector<double> a(m * m, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const cplx v = h(r, c);
            a[r * m + c] = v.real();
            a[(r + n) * m + (c + n)] = v.real();
            a[r * m + (c + n)] = -v.imag();
            a[(r + n) * m + c] = v.imag();
        }
    }
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if (off < 1e-26) {
            break;
        }
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = a[p * m + q];
                if (std::abs(apq) < 1e-18) {
                    continue;
                }
                const double app = a[p * m + p];
                const double aqq = a[q * m + q];
                const double phi = 0.5 * std::atan2(2.0 * apq, aqq - app);
                const double c = std::cos(phi);
                const double s = std::sin(phi);
                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = a[k * m + p];
                    const double akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = a[p * m + k];
                    const double aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> evs(n);
    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) {
        diag[i] = a[i * m + i];
    }
    std::sort(diag.begin(), diag.end());
    for (std::size_t i = 0; i < n; ++i) {
        evs[i] = 0.5 * (diag[2 * i] + diag[2 * i + 1]);
    }
    return evs;
}

} // namespace qprune::test
