#pragma once

#include "qprune/linalg.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qprune {

enum class GateKind : std::uint8_t {
    X,
    SX,
    RZ,
    ID,
    H,
    CX,
    SWAP,
    CRZ,
    CRX,
    CRY,
    CP,
    RZZ,
};

/// OpenQASM mnemonic for a kind ("x", "crz", ...).
std::string_view gate_name(GateKind kind);

/// Inverse of gate_name; also accepts the "cu1" alias for CP.
/// Returns nullopt for names outside the supported set.
std::optional<GateKind> gate_kind_from_name(std::string_view name);

constexpr bool is_two_qubit(GateKind k) {
    return k == GateKind::CX || k == GateKind::SWAP || k == GateKind::CRZ ||
           k == GateKind::CRX || k == GateKind::CRY || k == GateKind::CP ||
           k == GateKind::RZZ;
}

constexpr bool is_parametric(GateKind k) {
    return k == GateKind::RZ || k == GateKind::CRZ || k == GateKind::CRX ||
           k == GateKind::CRY || k == GateKind::CP || k == GateKind::RZZ;
}

/// Two-qubit parametric kinds that the router may discard.
constexpr bool is_prunable(GateKind k) {
    return is_two_qubit(k) && is_parametric(k);
}

constexpr bool is_basis_gate(GateKind k) {
    return k == GateKind::CX || k == GateKind::ID || k == GateKind::RZ ||
           k == GateKind::SX || k == GateKind::X;
}

/// A single gate application. Construct through the factory functions so the
/// kind/operand/angle shape invariants hold by construction: two-qubit gates
/// carry two distinct qubits, parametric gates carry a finite angle, nothing
/// else carries one.
struct Gate {
    GateKind kind = GateKind::ID;
    std::uint32_t q0 = 0;
    std::uint32_t q1 = 0;    // valid iff is_two_qubit(kind)
    double angle = 0.0;      // valid iff is_parametric(kind)

    static Gate one_qubit(GateKind kind, std::uint32_t q);
    static Gate one_qubit(GateKind kind, std::uint32_t q, double angle);
    static Gate two_qubit(GateKind kind, std::uint32_t a, std::uint32_t b);
    static Gate two_qubit(GateKind kind, std::uint32_t a, std::uint32_t b, double angle);

    static Gate x(std::uint32_t q) { return one_qubit(GateKind::X, q); }
    static Gate sx(std::uint32_t q) { return one_qubit(GateKind::SX, q); }
    static Gate id(std::uint32_t q) { return one_qubit(GateKind::ID, q); }
    static Gate h(std::uint32_t q) { return one_qubit(GateKind::H, q); }
    static Gate rz(double theta, std::uint32_t q) { return one_qubit(GateKind::RZ, q, theta); }
    static Gate cx(std::uint32_t c, std::uint32_t t) { return two_qubit(GateKind::CX, c, t); }
    static Gate swap(std::uint32_t a, std::uint32_t b) { return two_qubit(GateKind::SWAP, a, b); }
    static Gate crz(double theta, std::uint32_t c, std::uint32_t t) {
        return two_qubit(GateKind::CRZ, c, t, theta);
    }
    static Gate crx(double theta, std::uint32_t c, std::uint32_t t) {
        return two_qubit(GateKind::CRX, c, t, theta);
    }
    static Gate cry(double theta, std::uint32_t c, std::uint32_t t) {
        return two_qubit(GateKind::CRY, c, t, theta);
    }
    static Gate cp(double theta, std::uint32_t a, std::uint32_t b) {
        return two_qubit(GateKind::CP, a, b, theta);
    }
    static Gate rzz(double theta, std::uint32_t a, std::uint32_t b) {
        return two_qubit(GateKind::RZZ, a, b, theta);
    }

    int num_qubits() const { return is_two_qubit(kind) ? 2 : 1; }

    bool operator==(const Gate& other) const = default;
};

/// Ordered gate list over a fixed-width register. Gate order is program
/// order; nothing here reorders or commutes gates. Treat instances as
/// immutable once built (safe to share across threads).
class Circuit {
public:
    Circuit() = default;
    explicit Circuit(std::uint32_t num_qubits, std::string name = {})
        : num_qubits_(num_qubits), name_(std::move(name)) {}

    std::uint32_t num_qubits() const { return num_qubits_; }
    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    const std::vector<Gate>& gates() const { return gates_; }
    std::size_t size() const { return gates_.size(); }
    bool empty() const { return gates_.empty(); }
    const Gate& operator[](std::size_t i) const { return gates_[i]; }

    auto begin() const { return gates_.begin(); }
    auto end() const { return gates_.end(); }

    /// Appends a gate, checking operand indices against the register width.
    void add(const Gate& g) {
        if (g.q0 >= num_qubits_ || (is_two_qubit(g.kind) && g.q1 >= num_qubits_)) {
            throw std::out_of_range("Circuit::add: qubit index out of range for '" +
                                    std::string(gate_name(g.kind)) + "'");
        }
        gates_.push_back(g);
    }

    void reserve(std::size_t n) { gates_.reserve(n); }

    bool operator==(const Circuit& other) const {
        return num_qubits_ == other.num_qubits_ && gates_ == other.gates_;
    }

private:
    std::uint32_t num_qubits_ = 0;
    std::string name_;
    std::vector<Gate> gates_;
};

/// Number of gates of `kind`, or all gates when no filter is given.
std::size_t count_gates(const Circuit& circuit, std::optional<GateKind> kind = std::nullopt);

/// Exact unitary of a single gate: 2x2 for one-qubit kinds, 4x4 for
/// two-qubit kinds with basis order |q0 q1> (q0 is the high bit).
CMatrix gate_unitary(const Gate& gate);

/// Parse error with source position, thrown by parse_qasm.
class QasmParseError : public std::runtime_error {
public:
    QasmParseError(std::string message, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Parses the OpenQASM 2.0 subset used by this toolkit: one quantum
/// register, applications of the supported gate set, barriers (ignored)
/// and comments. Angle expressions fold constants built from literals,
/// pi, parentheses and + - * / with unary minus.
Circuit parse_qasm(std::string_view text);

/// Serializes a circuit; parse_qasm(emit_qasm(c)) reproduces the gate list
/// exactly (angles are printed with 17 significant digits).
std::string emit_qasm(const Circuit& circuit);

} // namespace qprune
