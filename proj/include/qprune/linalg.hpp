#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qprune {

using cplx = std::complex<double>;

/// Small dense complex matrix (row-major). Sized for gate unitaries and
/// few-qubit test oracles, not for state evolution.
class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(std::size_t n) : n_(n), a_(n * n) {}

    static CMatrix identity(std::size_t n) {
        CMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    std::size_t dim() const { return n_; }

    cplx& operator()(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

    CMatrix operator*(const CMatrix& rhs) const {
        if (n_ != rhs.n_) {
            throw std::invalid_argument("CMatrix: dimension mismatch");
        }
        CMatrix out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t k = 0; k < n_; ++k) {
                const cplx v = (*this)(i, k);
                if (v == cplx{}) {
                    continue;
                }
                for (std::size_t j = 0; j < n_; ++j) {
                    out(i, j) += v * rhs(k, j);
                }
            }
        }
        return out;
    }

    CMatrix adjoint() const {
        CMatrix out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                out(j, i) = std::conj((*this)(i, j));
            }
        }
        return out;
    }

    /// max |a_ij - b_ij|
    double max_abs_diff(const CMatrix& rhs) const {
        if (n_ != rhs.n_) {
            throw std::invalid_argument("CMatrix: dimension mismatch");
        }
        double m = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            m = std::max(m, std::abs(a_[i] - rhs.a_[i]));
        }
        return m;
    }

    /// ||U†U - I||_max, zero for a perfect unitary.
    double unitarity_error() const {
        const CMatrix p = adjoint() * (*this);
        return p.max_abs_diff(identity(n_));
    }

    /// min over global phases e^{i phi} of ||A - e^{i phi} B||_max.
    /// The phase is estimated from the largest entry of B.
    double max_abs_diff_upto_phase(const CMatrix& rhs) const {
        if (n_ != rhs.n_) {
            throw std::invalid_argument("CMatrix: dimension mismatch");
        }
        std::size_t best = 0;
        double mag = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            if (std::abs(rhs.a_[i]) > mag) {
                mag = std::abs(rhs.a_[i]);
                best = i;
            }
        }
        if (mag == 0.0) {
            return max_abs_diff(rhs);
        }
        const cplx phase = a_[best] / rhs.a_[best];
        const double pm = std::abs(phase);
        if (pm == 0.0) {
            return max_abs_diff(rhs);
        }
        const cplx unit = phase / pm;
        double m = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            m = std::max(m, std::abs(a_[i] - unit * rhs.a_[i]));
        }
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<cplx> a_;
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const std::size_t na = a.dim();
    const std::size_t nb = b.dim();
    CMatrix out(na * nb);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            for (std::size_t k = 0; k < nb; ++k) {
                for (std::size_t l = 0; l < nb; ++l) {
                    out(i * nb + k, j * nb + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return out;
}

} // namespace qprune
