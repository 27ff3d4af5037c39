#include "qprune/rng.hpp"
#include "qprune/simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

namespace qprune {

// Trajectory sampling uses the waiting-time formulation of Kraus
// unraveling. The all-no-jump path is deterministic, so it is evolved once
// (with periodic checkpoints, the cumulative survival probability after
// every noise block, and each block's pre-noise pair populations); a shot
// first draws where its survival threshold crosses that curve. Shots that
// never jump cost O(1).
//
// A crossing shot resolves which sub-channel fired using the cached block
// populations (everything about the block outcome is sampled analytically,
// without touching a state). When the outcome is a single jump, the rest of
// the trajectory is a deterministic function of (block, jump operator), so
// its survival curve and final overlap are memoized: repeat shots that draw
// no further jump are O(1) as well. Only memo misses, shots with a second
// crossing, and blocks with multiple jumps evolve a statevector, and those
// evolutions use one fused pass per CX.
//
// Channel order per CX: two-qubit depolarizing (no-jump weight
// 1 - 15 p2/16, jumps are the 15 non-identity two-qubit Paulis), amplitude
// damping on each involved qubit (state-dependent no-jump operator
// diag(1, sqrt(1-gamma))), then pure dephasing on each qubit (no-jump
// weight 1 - pz, jump applies Z). Scalar no-jump weights never touch the
// state; amplitude-damping factors are applied unnormalized and all
// normalization happens analytically, with one exact division at the final
// overlap.

namespace {

constexpr std::size_t kCheckpointSpacing = 16; // noise blocks per checkpoint
constexpr std::uint64_t kShotBlock = 2048;     // shots per reduction block

struct Op {
    enum Kind : std::uint8_t { Rz, Sx, PauliX, U2, Cx } kind;
    std::uint32_t qa = 0;
    std::uint32_t qb = 0;
    cplx u00{}, u01{}, u10{}, u11{}; // U2 matrix / Rz phases in u00, u11
};

// --- raw statevector kernels ------------------------------------------------

void k_rz(cplx* s, std::size_t n, std::size_t mask, cplx em, cplx ep) {
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            s[hi + lo] *= em;
            s[hi + lo + mask] *= ep;
        }
    }
}

void k_sx(cplx* s, std::size_t n, std::size_t mask) {
    const cplx p(0.5, 0.5);
    const cplx m(0.5, -0.5);
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            const cplx a0 = s[hi + lo];
            const cplx a1 = s[hi + lo + mask];
            s[hi + lo] = p * a0 + m * a1;
            s[hi + lo + mask] = m * a0 + p * a1;
        }
    }
}

void k_u2(cplx* s, std::size_t n, std::size_t mask, cplx u00, cplx u01, cplx u10, cplx u11) {
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            const cplx a0 = s[hi + lo];
            const cplx a1 = s[hi + lo + mask];
            s[hi + lo] = u00 * a0 + u01 * a1;
            s[hi + lo + mask] = u10 * a0 + u11 * a1;
        }
    }
}

void k_x(cplx* s, std::size_t n, std::size_t mask) {
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            std::swap(s[hi + lo], s[hi + lo + mask]);
        }
    }
}

void k_y(cplx* s, std::size_t n, std::size_t mask) {
    const cplx mi(0.0, -1.0);
    const cplx pi(0.0, 1.0);
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            const cplx a0 = s[hi + lo];
            const cplx a1 = s[hi + lo + mask];
            s[hi + lo] = mi * a1;
            s[hi + lo + mask] = pi * a0;
        }
    }
}

void k_z(cplx* s, std::size_t n, std::size_t mask) {
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            s[hi + lo + mask] = -s[hi + lo + mask];
        }
    }
}

/// Amplitude-damping jump: moves the bit=1 half down to bit=0 (unnormalized).
void k_ad_jump(cplx* s, std::size_t n, std::size_t mask) {
    for (std::size_t hi = 0; hi < n; hi += 2 * mask) {
        for (std::size_t lo = 0; lo < mask; ++lo) {
            s[hi + lo] = s[hi + lo + mask];
            s[hi + lo + mask] = cplx{};
        }
    }
}

struct QuadLoop {
    std::size_t m1, m2; // sorted masks
    std::size_t amask, bmask;
};

inline QuadLoop quad_loop(std::uint32_t qa, std::uint32_t qb) {
    const std::size_t amask = std::size_t{1} << qa;
    const std::size_t bmask = std::size_t{1} << qb;
    return {std::min(amask, bmask), std::max(amask, bmask), amask, bmask};
}

/// CX with fused amplitude-damping scaling on both qubits; accumulates the
/// post-pass quadrant norms (indexed by (bit_qc << 1) | bit_qt) and returns
/// their sum. Quadrant factors by post-gate bits: 1, s, s, s^2.
///
/// Small inner strides defeat vectorization of the nested-complex form, so
/// low qubit pairs take a flattened double-lane path with restrict streams.
double k_cx_ad(cplx* s, std::size_t n, std::uint32_t qc, std::uint32_t qt, double damp,
               double quad[4]) {
    const QuadLoop q = quad_loop(qc, qt);
    const std::size_t cm = q.amask;
    const std::size_t tm = q.bmask;
    const double s2 = damp * damp;
    double n00 = 0.0, n01 = 0.0, n10 = 0.0, n11 = 0.0;
    if (q.m1 >= 512) {
        for (std::size_t a = 0; a < n; a += 2 * q.m2) {
            for (std::size_t b = 0; b < q.m2; b += 2 * q.m1) {
                for (std::size_t c = 0; c < q.m1; ++c) {
                    const std::size_t base = a + b + c;
                    cplx& e00 = s[base];
                    cplx& e01 = s[base + tm];
                    cplx& e10 = s[base + cm];
                    cplx& e11 = s[base + cm + tm];
                    const cplx v10 = e11 * damp;
                    const cplx v11 = e10 * s2;
                    e01 *= damp;
                    e10 = v10;
                    e11 = v11;
                    n00 += std::norm(e00);
                    n01 += std::norm(e01);
                    n10 += std::norm(v10);
                    n11 += std::norm(v11);
                }
            }
        }
    } else {
        for (std::size_t a = 0; a < n; a += 2 * q.m2) {
            for (std::size_t b = 0; b < q.m2; b += 2 * q.m1) {
                double* __restrict p00 = reinterpret_cast<double*>(s + a + b);
                double* __restrict p01 = reinterpret_cast<double*>(s + a + b + tm);
                double* __restrict p10 = reinterpret_cast<double*>(s + a + b + cm);
                double* __restrict p11 = reinterpret_cast<double*>(s + a + b + cm + tm);
                for (std::size_t c = 0; c < 2 * q.m1; ++c) {
                    const double v10 = p11[c] * damp;
                    const double v11 = p10[c] * s2;
                    const double v01 = p01[c] * damp;
                    p01[c] = v01;
                    p10[c] = v10;
                    p11[c] = v11;
                    n00 += p00[c] * p00[c];
                    n01 += v01 * v01;
                    n10 += v10 * v10;
                    n11 += v11 * v11;
                }
            }
        }
    }
    quad[0] = n00;
    quad[1] = n01;
    quad[2] = n10;
    quad[3] = n11;
    return n00 + n01 + n10 + n11;
}

/// Plain CX permutation.
void k_cx_plain(cplx* s, std::size_t n, std::uint32_t qc, std::uint32_t qt) {
    const QuadLoop q = quad_loop(qc, qt);
    const std::size_t cm = q.amask;
    const std::size_t tm = q.bmask;
    for (std::size_t a = 0; a < n; a += 2 * q.m2) {
        for (std::size_t b = 0; b < q.m2; b += 2 * q.m1) {
            double* __restrict p10 = reinterpret_cast<double*>(s + a + b + cm);
            double* __restrict p11 = reinterpret_cast<double*>(s + a + b + cm + tm);
            for (std::size_t c = 0; c < 2 * q.m1; ++c) {
                const double x = p10[c];
                p10[c] = p11[c];
                p11[c] = x;
            }
        }
    }
}

/// CX with quadrant-population accumulation (no scaling). pops are indexed
/// by (bit_qc << 1) | bit_qt of the post-gate state and are unnormalized.
void k_cx_pops(cplx* s, std::size_t n, std::uint32_t qc, std::uint32_t qt, double pops[4]) {
    const QuadLoop q = quad_loop(qc, qt);
    const std::size_t cm = q.amask;
    const std::size_t tm = q.bmask;
    double p00 = 0.0, p01 = 0.0, p10 = 0.0, p11 = 0.0;
    for (std::size_t a = 0; a < n; a += 2 * q.m2) {
        for (std::size_t b = 0; b < q.m2; b += 2 * q.m1) {
            double* __restrict p0 = reinterpret_cast<double*>(s + a + b);
            double* __restrict p1 = reinterpret_cast<double*>(s + a + b + tm);
            double* __restrict p2 = reinterpret_cast<double*>(s + a + b + cm);
            double* __restrict p3 = reinterpret_cast<double*>(s + a + b + cm + tm);
            for (std::size_t c = 0; c < 2 * q.m1; ++c) {
                const double x = p2[c];
                const double y = p3[c];
                p2[c] = y;
                p3[c] = x;
                p00 += p0[c] * p0[c];
                p01 += p1[c] * p1[c];
                p10 += y * y;
                p11 += x * x;
            }
        }
    }
    pops[0] = p00;
    pops[1] = p01;
    pops[2] = p10;
    pops[3] = p11;
}

/// Diagonal scaling by real quadrant factors f[(bit_qa << 1) | bit_qb].
void k_scale_quads(cplx* s, std::size_t n, std::uint32_t qa, std::uint32_t qb,
                   const double f[4]) {
    const QuadLoop q = quad_loop(qa, qb);
    const std::size_t am = q.amask;
    const std::size_t bm = q.bmask;
    for (std::size_t a = 0; a < n; a += 2 * q.m2) {
        for (std::size_t b = 0; b < q.m2; b += 2 * q.m1) {
            double* __restrict p0 = reinterpret_cast<double*>(s + a + b);
            double* __restrict p1 = reinterpret_cast<double*>(s + a + b + bm);
            double* __restrict p2 = reinterpret_cast<double*>(s + a + b + am);
            double* __restrict p3 = reinterpret_cast<double*>(s + a + b + am + bm);
            for (std::size_t c = 0; c < 2 * q.m1; ++c) {
                p0[c] *= f[0];
                p1[c] *= f[1];
                p2[c] *= f[2];
                p3[c] *= f[3];
            }
        }
    }
}

void k_inner_norm(const cplx* target, const cplx* s, std::size_t n, cplx& inner, double& norm) {
    double ir0 = 0.0, ii0 = 0.0, nm0 = 0.0;
    double ir1 = 0.0, ii1 = 0.0, nm1 = 0.0;
    const double* __restrict t = reinterpret_cast<const double*>(target);
    const double* __restrict v = reinterpret_cast<const double*>(s);
    for (std::size_t i = 0; i < 2 * n; i += 4) {
        const double tr0 = t[i], ti0 = t[i + 1], vr0 = v[i], vi0 = v[i + 1];
        const double tr1 = t[i + 2], ti1 = t[i + 3], vr1 = v[i + 2], vi1 = v[i + 3];
        ir0 += tr0 * vr0 + ti0 * vi0;
        ii0 += tr0 * vi0 - ti0 * vr0;
        nm0 += vr0 * vr0 + vi0 * vi0;
        ir1 += tr1 * vr1 + ti1 * vi1;
        ii1 += tr1 * vi1 - ti1 * vr1;
        nm1 += vr1 * vr1 + vi1 * vi1;
    }
    inner = cplx(ir0 + ir1, ii0 + ii1);
    norm = nm0 + nm1;
}

double k_norm(const cplx* s, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    const double* __restrict v = reinterpret_cast<const double*>(s);
    for (std::size_t i = 0; i < 2 * n; i += 4) {
        a0 += v[i] * v[i];
        a1 += v[i + 1] * v[i + 1];
        a2 += v[i + 2] * v[i + 2];
        a3 += v[i + 3] * v[i + 3];
    }
    return (a0 + a1) + (a2 + a3);
}

// --- analytic pair-population bookkeeping -------------------------------------

/// Normalized probabilities of the (bit_a, bit_b) subspaces of a block's
/// qubit pair, updated analytically through the block's sub-channels.
struct Pops {
    double p[4];

    void normalize() {
        const double s = p[0] + p[1] + p[2] + p[3];
        for (double& v : p) {
            v /= s;
        }
    }
    double pop1_a() const { return p[2] + p[3]; }
    double pop1_b() const { return p[1] + p[3]; }
    void ad_nojump_a(double gamma) {
        p[2] *= 1.0 - gamma;
        p[3] *= 1.0 - gamma;
        normalize();
    }
    void ad_nojump_b(double gamma) {
        p[1] *= 1.0 - gamma;
        p[3] *= 1.0 - gamma;
        normalize();
    }
    void ad_jump_a() {
        p[0] = p[2];
        p[1] = p[3];
        p[2] = p[3] = 0.0;
        normalize();
    }
    void ad_jump_b() {
        p[0] = p[1];
        p[2] = p[3];
        p[1] = p[3] = 0.0;
        normalize();
    }
    void pauli(int pa, int pb) {
        // only the X component of a Pauli moves population
        if (pa == 1 || pa == 2) {
            std::swap(p[0], p[2]);
            std::swap(p[1], p[3]);
        }
        if (pb == 1 || pb == 2) {
            std::swap(p[0], p[1]);
            std::swap(p[2], p[3]);
        }
    }
};

/// Everything that happened in one noise block: which sub-channels fired
/// (stage order: depolarizing, AD on qubit a, AD on qubit b, Z on a, Z on b)
/// and the depolarizing Pauli index when stage 0 fired.
struct BlockOutcome {
    bool jump[5] = {false, false, false, false, false};
    int pauli = 0;
    int jumps_total = 0;
};

// --- the engine ----------------------------------------------------------------

class TrajectoryEngine {
public:
    TrajectoryEngine(const Circuit& circuit, const NoiseModel& noise, const Statevector& target)
        : n_(std::size_t{1} << circuit.num_qubits()), target_(target.amplitudes()) {
        noise.validate();
        if (circuit.num_qubits() > 20) {
            throw std::invalid_argument("simulate_noisy_traj: width limit is 20 qubits");
        }
        if (target.num_qubits() != circuit.num_qubits()) {
            throw std::invalid_argument("simulate_noisy_traj: target width mismatch");
        }
        p2_ = noise.p2;
        gamma_ = noise.gamma_2q();
        pz_ = noise.dephase_2q();
        damp_ = std::sqrt(1.0 - gamma_);
        build_plan(circuit);
        run_primary_path();
    }

    /// Per-worker scratch: a state buffer plus the tail memo.
    struct Scratch {
        std::vector<cplx> state;
        std::unordered_map<std::uint64_t, std::pair<std::vector<double>, double>> memo;
    };

    double shot_value(std::uint64_t seed, std::uint64_t shot, Scratch& scratch) const {
        Rng rng = Rng::derive(seed, shot);
        if (noiseless_) {
            return f0_;
        }
        const double r = rng.uniform();
        const std::size_t blocks = block_op_.size();
        if (r < survival_[blocks]) {
            return f0_;
        }
        std::size_t lo = 1;
        std::size_t hi = blocks;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (survival_[mid] <= r) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return jump_shot(static_cast<std::uint32_t>(lo), rng, scratch);
    }

    std::size_t num_blocks() const { return block_op_.size(); }
    std::size_t num_ops() const { return ops_.size(); }
    double final_survival() const { return survival_.empty() ? 1.0 : survival_.back(); }
    double f0() const { return f0_; }
    bool is_noiseless() const { return noiseless_; }

private:
    void build_plan(const Circuit& circuit) {
        // collect ops, fusing runs of single-qubit gates on one qubit into a
        // single 2x2 application (noise only attaches to CX, so this is an
        // exact regrouping)
        ops_.reserve(circuit.size());
        const auto flush = [&](std::uint32_t q, CMatrix& acc, bool& live) {
            if (!live) {
                return;
            }
            Op op{Op::U2, q, 0, acc(0, 0), acc(0, 1), acc(1, 0), acc(1, 1)};
            ops_.push_back(op);
            live = false;
        };

        std::uint32_t pending_q = 0;
        CMatrix pending = CMatrix::identity(2);
        bool pending_live = false;

        for (const auto& g : circuit) {
            switch (g.kind) {
            case GateKind::ID:
                break;
            case GateKind::RZ:
            case GateKind::SX:
            case GateKind::X: {
                if (pending_live && pending_q != g.q0) {
                    flush(pending_q, pending, pending_live);
                }
                if (!pending_live) {
                    pending_q = g.q0;
                    pending = CMatrix::identity(2);
                    pending_live = true;
                }
                pending = gate_unitary(g) * pending;
                break;
            }
            case GateKind::CX:
                flush(pending_q, pending, pending_live);
                block_op_.push_back(static_cast<std::uint32_t>(ops_.size()));
                ops_.push_back({Op::Cx, g.q0, g.q1, {}, {}, {}, {}});
                break;
            default:
                throw std::invalid_argument(
                    "simulate_noisy_traj: circuit is not in basis gates");
            }
        }
        flush(pending_q, pending, pending_live);

        // demote trivially structured fused ops back to cheap kernels
        for (auto& op : ops_) {
            if (op.kind != Op::U2) {
                continue;
            }
            if (op.u01 == cplx{} && op.u10 == cplx{}) {
                op.kind = Op::Rz; // any diagonal works through the Rz kernel
            }
        }

        noiseless_ = (p2_ == 0.0 && gamma_ == 0.0 && pz_ == 0.0) || block_op_.empty();
        scalar_block_ = (1.0 - 15.0 * p2_ / 16.0) * (1.0 - pz_) * (1.0 - pz_);
    }

    /// Applies ops [begin, end) in no-jump mode; returns the state's squared
    /// norm after the last CX in the range (or `norm_in` if there is none).
    double advance_nojump(cplx* s, std::size_t begin, std::size_t end, double norm_in) const {
        double norm = norm_in;
        double quad[4];
        for (std::size_t i = begin; i < end; ++i) {
            const Op& op = ops_[i];
            const std::size_t mask = std::size_t{1} << op.qa;
            switch (op.kind) {
            case Op::Rz:
                k_rz(s, n_, mask, op.u00, op.u11);
                break;
            case Op::Sx:
                k_sx(s, n_, mask);
                break;
            case Op::PauliX:
                k_x(s, n_, mask);
                break;
            case Op::U2:
                k_u2(s, n_, mask, op.u00, op.u01, op.u10, op.u11);
                break;
            case Op::Cx:
                norm = k_cx_ad(s, n_, op.qa, op.qb, damp_, quad);
                break;
            }
        }
        return norm;
    }

    void run_primary_path() {
        std::vector<cplx> state(n_, cplx{});
        state[0] = 1.0;
        const std::size_t blocks = block_op_.size();
        survival_.assign(blocks + 1, 1.0);
        block_pops_.assign(blocks, {});
        checkpoints_.clear();
        checkpoints_.push_back(state); // before any op

        if (noiseless_) {
            advance_nojump(state.data(), 0, ops_.size(), 1.0);
            cplx in{};
            double nm = 0.0;
            k_inner_norm(target_.data(), state.data(), n_, in, nm);
            f0_ = std::norm(in) / nm;
            return;
        }

        // checkpoint spacing adapts so stored copies stay within ~256 MB
        const std::size_t max_copies =
            std::max<std::size_t>(2, (std::size_t{256} << 20) / (n_ * sizeof(cplx)));
        checkpoint_spacing_ = std::max<std::size_t>(
            kCheckpointSpacing, (blocks + max_copies - 1) / max_copies);

        const double inv_d2 = damp_ > 0.0 ? 1.0 / (damp_ * damp_) : 0.0;
        double scalar_acc = 1.0;
        std::size_t op_pos = 0;
        double quad[4];
        for (std::size_t b = 1; b <= blocks; ++b) {
            const std::size_t stop = block_op_[b - 1];
            advance_nojump(state.data(), op_pos, stop, 0.0);
            const Op& op = ops_[stop];
            const double norm = k_cx_ad(state.data(), n_, op.qa, op.qb, damp_, quad);
            op_pos = stop + 1;
            // pre-noise pair populations, recovered from the scaled quadrants
            Pops pops{};
            pops.p[0] = quad[0];
            pops.p[1] = quad[1] * inv_d2;
            pops.p[2] = quad[2] * inv_d2;
            pops.p[3] = quad[3] * inv_d2 * inv_d2;
            pops.normalize();
            block_pops_[b - 1] = {pops.p[0], pops.p[1], pops.p[2], pops.p[3]};

            scalar_acc *= scalar_block_;
            survival_[b] = scalar_acc * norm;
            if (b % checkpoint_spacing_ == 0 && b < blocks) {
                checkpoints_.push_back(state);
            }
        }
        advance_nojump(state.data(), op_pos, ops_.size(), 0.0);
        cplx in{};
        double nm = 0.0;
        k_inner_norm(target_.data(), state.data(), n_, in, nm);
        f0_ = std::norm(in) / nm;
    }

    void apply_pauli(cplx* s, std::uint32_t q, int pauli) const {
        const std::size_t mask = std::size_t{1} << q;
        switch (pauli) {
        case 1:
            k_x(s, n_, mask);
            break;
        case 2:
            k_y(s, n_, mask);
            break;
        case 3:
            k_z(s, n_, mask);
            break;
        default:
            break;
        }
    }

    /// Samples the full outcome of a crossing block from its cached pre-noise
    /// populations.
    bool sample_block_outcome(std::uint32_t t, Rng& rng, BlockOutcome& out) const {
        const auto& bp = block_pops_[t - 1];
        return sample_outcome_from_pops(Pops{{bp[0], bp[1], bp[2], bp[3]}}, rng, out);
    }

    /// Applies a fully decided block outcome to the state (no sampling).
    /// The CX itself must already have been applied.
    void apply_block_outcome(cplx* s, const Op& op, const BlockOutcome& out) const {
        if (out.jump[0]) {
            apply_pauli(s, op.qa, out.pauli >> 2);
            apply_pauli(s, op.qb, out.pauli & 3);
        }
        if (gamma_ > 0.0) {
            double quad[4] = {1.0, 1.0, 1.0, 1.0};
            bool scaled = false;
            if (out.jump[1]) {
                k_ad_jump(s, n_, std::size_t{1} << op.qa);
            } else {
                quad[2] *= damp_;
                quad[3] *= damp_;
                scaled = true;
            }
            if (out.jump[2]) {
                k_ad_jump(s, n_, std::size_t{1} << op.qb);
            } else {
                quad[1] *= damp_;
                quad[3] *= damp_;
                scaled = true;
            }
            if (scaled) {
                k_scale_quads(s, n_, op.qa, op.qb, quad);
            }
        }
        if (out.jump[3]) {
            k_z(s, n_, std::size_t{1} << op.qa);
        }
        if (out.jump[4]) {
            k_z(s, n_, std::size_t{1} << op.qb);
        }
    }

    /// Replays the primary path to just before block t's CX.
    cplx* replay_to_block(std::uint32_t t, Scratch& scratch) const {
        const std::size_t ci = (t - 1) / checkpoint_spacing_;
        const std::size_t chk_block = ci * checkpoint_spacing_;
        scratch.state = checkpoints_[ci];
        cplx* s = scratch.state.data();
        const std::size_t start_op = chk_block == 0 ? 0 : block_op_[chk_block - 1] + 1;
        advance_nojump(s, start_op, block_op_[t - 1], 0.0);
        return s;
    }

    /// Post-jump evolution in waiting-time form: one fused pass per CX, a
    /// fresh survival threshold per segment, analytic rewind of the fused
    /// damping factors when a crossing must be resolved in place.
    void tail_waiting(cplx* s, std::size_t from_op, double norm_in, Rng& rng) const {
        double r = rng.uniform();
        double survival = 1.0;
        double norm_prev = norm_in;
        const double inv_d = damp_ > 0.0 ? 1.0 / damp_ : 0.0;
        const double inv_d2 = inv_d * inv_d;
        double quad[4];
        for (std::size_t i = from_op; i < ops_.size(); ++i) {
            const Op& op = ops_[i];
            if (op.kind != Op::Cx) {
                advance_nojump(s, i, i + 1, 0.0);
                continue;
            }
            const double norm_new = k_cx_ad(s, n_, op.qa, op.qb, damp_, quad);
            const double next = survival * scalar_block_ * (norm_new / norm_prev);
            if (next > r) {
                survival = next;
                norm_prev = norm_new;
                continue;
            }
            // a sub-channel fired here: recover the pre-noise populations,
            // undo the fused no-jump damping, sample and apply the outcome
            Pops pops{};
            pops.p[0] = quad[0];
            pops.p[1] = quad[1] * inv_d2;
            pops.p[2] = quad[2] * inv_d2;
            pops.p[3] = quad[3] * inv_d2 * inv_d2;
            pops.normalize();
            BlockOutcome out;
            if (!sample_outcome_from_pops(pops, rng, out)) {
                survival = next;
                norm_prev = norm_new;
                continue;
            }
            if (gamma_ > 0.0) {
                const double undo[4] = {1.0, inv_d, inv_d, inv_d2};
                k_scale_quads(s, n_, op.qa, op.qb, undo);
            }
            apply_block_outcome(s, op, out);
            survival = 1.0;
            r = rng.uniform();
            norm_prev = k_norm(s, n_);
        }
    }

    /// Samples the full outcome of a block that is known to contain at least
    /// one jump: the first firing stage conditionally, every later stage
    /// ordinarily. Returns false when the total jump probability vanishes
    /// (crossing attributed to rounding).
    bool sample_outcome_from_pops(Pops pops, Rng& rng, BlockOutcome& out) const {
        const double c0 = 1.0 - 15.0 * p2_ / 16.0;
        const double c1 = 1.0 - gamma_ * pops.pop1_a();
        Pops after_a = pops;
        if (gamma_ > 0.0) {
            after_a.ad_nojump_a(gamma_);
        }
        const double c2 = 1.0 - gamma_ * after_a.pop1_b();
        const double c34 = 1.0 - pz_;
        const double p_any = 1.0 - c0 * c1 * c2 * c34 * c34;
        if (!(p_any > 0.0)) {
            return false;
        }
        const double u = rng.uniform() * p_any;
        const double cs[5] = {c0, c1, c2, c34, c34};
        int first = 4;
        double acc = 0.0;
        double prefix = 1.0;
        for (int i = 0; i < 5; ++i) {
            acc += prefix * (1.0 - cs[i]);
            if (u < acc) {
                first = i;
                break;
            }
            prefix *= cs[i];
        }
        out.jump[first] = true;
        out.jumps_total = 1;
        for (int stage = 0; stage < 5; ++stage) {
            const bool before = stage < first;
            if (stage == 0) {
                if (out.jump[0]) {
                    out.pauli = 1 + static_cast<int>(rng.uniform_int(15));
                    pops.pauli(out.pauli >> 2, out.pauli & 3);
                }
                continue;
            }
            if (stage == 1 || stage == 2) {
                if (gamma_ <= 0.0) {
                    continue;
                }
                const double pop1 = stage == 1 ? pops.pop1_a() : pops.pop1_b();
                bool fires = false;
                if (stage == first) {
                    fires = true;
                } else if (!before) {
                    const double prob = gamma_ * pop1;
                    fires = prob > 0.0 && rng.uniform() < prob;
                    if (fires) {
                        out.jump[stage] = true;
                        ++out.jumps_total;
                    }
                }
                if (fires) {
                    stage == 1 ? pops.ad_jump_a() : pops.ad_jump_b();
                } else {
                    stage == 1 ? pops.ad_nojump_a(gamma_) : pops.ad_nojump_b(gamma_);
                }
                continue;
            }
            if (stage != first && !before && pz_ > 0.0 && rng.uniform() < pz_) {
                out.jump[stage] = true;
                ++out.jumps_total;
            }
        }
        return true;
    }

    /// Unconditioned per-stage sampling (sequential fallback).
    void sample_block_unconditional(Pops& pops, Rng& rng, BlockOutcome& out) const {
        if (p2_ > 0.0 && rng.uniform() < 15.0 * p2_ / 16.0) {
            out.jump[0] = true;
            out.pauli = 1 + static_cast<int>(rng.uniform_int(15));
            ++out.jumps_total;
            pops.pauli(out.pauli >> 2, out.pauli & 3);
        }
        if (gamma_ > 0.0) {
            const double pa = gamma_ * pops.pop1_a();
            if (pa > 0.0 && rng.uniform() < pa) {
                out.jump[1] = true;
                ++out.jumps_total;
                pops.ad_jump_a();
            } else {
                pops.ad_nojump_a(gamma_);
            }
            const double pb = gamma_ * pops.pop1_b();
            if (pb > 0.0 && rng.uniform() < pb) {
                out.jump[2] = true;
                ++out.jumps_total;
                pops.ad_jump_b();
            } else {
                pops.ad_nojump_b(gamma_);
            }
        }
        if (pz_ > 0.0) {
            if (rng.uniform() < pz_) {
                out.jump[3] = true;
                ++out.jumps_total;
            }
            if (rng.uniform() < pz_) {
                out.jump[4] = true;
                ++out.jumps_total;
            }
        }
    }

    /// Fully sequential per-block evolution: exact for any damping strength,
    /// used when the fused factors cannot be rewound (gamma near 1).
    double jump_shot_sequential(std::uint32_t t, Rng& rng, Scratch& scratch) const {
        cplx* s = replay_to_block(t, scratch);
        const Op& op = ops_[block_op_[t - 1]];
        Pops pops{};
        k_cx_pops(s, n_, op.qa, op.qb, pops.p);
        pops.normalize();
        BlockOutcome out;
        if (!sample_outcome_from_pops(pops, rng, out)) {
            return f0_;
        }
        apply_block_outcome(s, op, out);
        for (std::size_t i = block_op_[t - 1] + 1; i < ops_.size(); ++i) {
            if (ops_[i].kind != Op::Cx) {
                advance_nojump(s, i, i + 1, 0.0);
                continue;
            }
            Pops bp{};
            k_cx_pops(s, n_, ops_[i].qa, ops_[i].qb, bp.p);
            bp.normalize();
            BlockOutcome bo;
            sample_block_unconditional(bp, rng, bo);
            apply_block_outcome(s, ops_[i], bo);
        }
        cplx in{};
        double nm = 0.0;
        k_inner_norm(target_.data(), s, n_, in, nm);
        return std::norm(in) / nm;
    }

    /// Evolves the decided outcome of block t to the end with no further
    /// jumps, recording the survival curve over blocks t+1..B and the final
    /// overlap. This is the memoized object for single-jump shots.
    std::pair<std::vector<double>, double> build_tail_memo(std::uint32_t t,
                                                           const BlockOutcome& out,
                                                           Scratch& scratch) const {
        cplx* s = replay_to_block(t, scratch);
        const Op& op = ops_[block_op_[t - 1]];
        k_cx_plain(s, n_, op.qa, op.qb);
        apply_block_outcome(s, op, out);

        const std::size_t blocks = block_op_.size();
        std::vector<double> surv;
        surv.reserve(blocks - t + 1);
        surv.push_back(1.0);
        double cur = 1.0;
        double norm_prev = k_norm(s, n_);
        double quad[4];
        std::size_t i = block_op_[t - 1] + 1;
        while (i < ops_.size()) {
            const Op& next = ops_[i];
            if (next.kind != Op::Cx) {
                advance_nojump(s, i, i + 1, 0.0);
                ++i;
                continue;
            }
            const double norm_new = k_cx_ad(s, n_, next.qa, next.qb, damp_, quad);
            cur *= scalar_block_ * (norm_new / norm_prev);
            norm_prev = norm_new;
            surv.push_back(cur);
            ++i;
        }
        cplx in{};
        double nm = 0.0;
        k_inner_norm(target_.data(), s, n_, in, nm);
        return {std::move(surv), std::norm(in) / nm};
    }

    /// Direct (state-evolving) continuation used for multi-jump outcomes and
    /// for shots whose second crossing leaves the memoized no-jump curve.
    double direct_continue(std::uint32_t t, const BlockOutcome& out, Rng& rng,
                           Scratch& scratch) const {
        cplx* s = replay_to_block(t, scratch);
        const Op& op = ops_[block_op_[t - 1]];
        k_cx_plain(s, n_, op.qa, op.qb);
        apply_block_outcome(s, op, out);
        tail_waiting(s, block_op_[t - 1] + 1, k_norm(s, n_), rng);
        cplx in{};
        double nm = 0.0;
        k_inner_norm(target_.data(), s, n_, in, nm);
        return std::norm(in) / nm;
    }

    /// Continuation for a known second-crossing block u: no-jump evolution to
    /// u, in-place resolution there, waiting-time tail afterwards.
    double continue_to_second(std::uint32_t t, const BlockOutcome& out, std::uint32_t u,
                              Rng& rng, Scratch& scratch) const {
        cplx* s = replay_to_block(t, scratch);
        const Op& op = ops_[block_op_[t - 1]];
        k_cx_plain(s, n_, op.qa, op.qb);
        apply_block_outcome(s, op, out);
        advance_nojump(s, block_op_[t - 1] + 1, block_op_[u - 1], 0.0);

        const Op& op2 = ops_[block_op_[u - 1]];
        Pops pops{};
        k_cx_pops(s, n_, op2.qa, op2.qb, pops.p);
        pops.normalize();
        BlockOutcome out2;
        if (!sample_outcome_from_pops(pops, rng, out2)) {
            // vanishing probability at the predicted crossing: keep no-jump
            if (gamma_ > 0.0) {
                const double redo[4] = {1.0, damp_, damp_, damp_ * damp_};
                k_scale_quads(s, n_, op2.qa, op2.qb, redo);
            }
            tail_waiting(s, block_op_[u - 1] + 1, k_norm(s, n_), rng);
        } else {
            apply_block_outcome(s, op2, out2);
            tail_waiting(s, block_op_[u - 1] + 1, k_norm(s, n_), rng);
        }
        cplx in{};
        double nm = 0.0;
        k_inner_norm(target_.data(), s, n_, in, nm);
        return std::norm(in) / nm;
    }

    /// Full evaluation of a shot whose survival threshold crosses at block t.
    double jump_shot(std::uint32_t t, Rng& rng, Scratch& scratch) const {
        if (damp_ < 1e-3) {
            // near-total damping: cached populations are not recoverable from
            // the fused pass, fall back to explicit per-block sampling
            return jump_shot_sequential(t, rng, scratch);
        }
        BlockOutcome out;
        if (!sample_block_outcome(t, rng, out)) {
            return f0_; // crossing attributed to rounding; treat as no jump
        }

        if (out.jumps_total > 1) {
            return direct_continue(t, out, rng, scratch);
        }

        // single-jump outcome: key = (block, jump operator)
        int jump_id = 0;
        if (out.jump[0]) {
            jump_id = out.pauli - 1; // 0..14
        } else if (out.jump[1]) {
            jump_id = 15;
        } else if (out.jump[2]) {
            jump_id = 16;
        } else if (out.jump[3]) {
            jump_id = 17;
        } else {
            jump_id = 18;
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(t) << 8) | jump_id;

        auto it = scratch.memo.find(key);
        if (it == scratch.memo.end()) {
            it = scratch.memo.emplace(key, build_tail_memo(t, out, scratch)).first;
        }
        const std::vector<double>& surv = it->second.first;
        const double f_nojump = it->second.second;

        const double r2 = rng.uniform();
        if (r2 < surv.back()) {
            return f_nojump;
        }
        // second crossing: surv[j] covers block t + j
        std::size_t lo = 1;
        std::size_t hi = surv.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (surv[mid] <= r2) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return continue_to_second(t, out, static_cast<std::uint32_t>(t + lo), rng, scratch);
    }

    std::size_t n_;
    std::vector<cplx> target_;
    std::vector<Op> ops_;
    std::vector<std::uint32_t> block_op_;
    std::vector<double> survival_;
    std::vector<std::array<double, 4>> block_pops_;
    std::vector<std::vector<cplx>> checkpoints_;
    std::size_t checkpoint_spacing_ = kCheckpointSpacing;
    double p2_ = 0.0;
    double gamma_ = 0.0;
    double pz_ = 0.0;
    double damp_ = 1.0;
    double scalar_block_ = 1.0;
    double f0_ = 0.0;
    bool noiseless_ = false;
};

TrajectoryEstimate run_shots(const TrajectoryEngine& eng, std::uint64_t shots,
                             std::uint64_t seed) {
    if (eng.is_noiseless()) {
        // every shot reproduces the deterministic path
        return {eng.f0(), 0.0, shots};
    }
    const std::uint64_t num_blocks = (shots + kShotBlock - 1) / kShotBlock;
    std::vector<double> block_sum(num_blocks, 0.0);
    std::vector<double> block_sumsq(num_blocks, 0.0);

    const auto worker_fn = [&](std::atomic<std::uint64_t>& next) {
        TrajectoryEngine::Scratch scratch;
        for (;;) {
            const std::uint64_t blk = next.fetch_add(1);
            if (blk >= num_blocks) {
                return;
            }
            const std::uint64_t begin = blk * kShotBlock;
            const std::uint64_t end = std::min(shots, begin + kShotBlock);
            double sum = 0.0;
            double sumsq = 0.0;
            for (std::uint64_t shot = begin; shot < end; ++shot) {
                const double f = eng.shot_value(seed, shot, scratch);
                sum += f;
                sumsq += f * f;
            }
            block_sum[blk] = sum;
            block_sumsq[blk] = sumsq;
        }
    };

    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) {
        workers = 1;
    }
    workers = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, std::max<std::uint64_t>(num_blocks, 1)));

    std::atomic<std::uint64_t> next{0};
    if (workers <= 1) {
        worker_fn(next);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] { worker_fn(next); });
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    // block-ordered reduction keeps the result independent of scheduling
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::uint64_t b = 0; b < num_blocks; ++b) {
        sum += block_sum[b];
        sumsq += block_sumsq[b];
    }
    if (std::getenv("QPRUNE_TRAJ_DEBUG") != nullptr) {
        std::fprintf(stderr, "traj: blocks=%zu ops=%zu survival=%.4f f0=%.6f\n",
                     eng.num_blocks(), eng.num_ops(), eng.final_survival(), eng.f0());
    }
    const double mean = sum / static_cast<double>(shots);
    double stderr_est = 0.0;
    if (shots > 1) {
        const double var = std::max(0.0, sumsq / static_cast<double>(shots) - mean * mean);
        stderr_est = std::sqrt(var / static_cast<double>(shots - 1));
    }
    return {mean, stderr_est, shots};
}

} // namespace

TrajectoryEstimate simulate_noisy_traj(const Circuit& circuit, const NoiseModel& noise,
                                       std::uint64_t shots, std::uint64_t seed,
                                       const Statevector& target) {
    if (shots < 1) {
        throw std::invalid_argument("simulate_noisy_traj: need at least one shot");
    }
    const TrajectoryEngine engine(circuit, noise, target);
    return run_shots(engine, shots, seed);
}

TrajectoryEstimate simulate_noisy_traj(const Circuit& circuit, const NoiseModel& noise,
                                       std::uint64_t shots, std::uint64_t seed) {
    return simulate_noisy_traj(circuit, noise, shots, seed, simulate_ideal(circuit));
}

} // namespace qprune
