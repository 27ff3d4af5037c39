#include "qprune/circuit.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace qprune {

namespace {

struct KindName {
    GateKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 12> kKindNames{{
    {GateKind::X, "x"},
    {GateKind::SX, "sx"},
    {GateKind::RZ, "rz"},
    {GateKind::ID, "id"},
    {GateKind::H, "h"},
    {GateKind::CX, "cx"},
    {GateKind::SWAP, "swap"},
    {GateKind::CRZ, "crz"},
    {GateKind::CRX, "crx"},
    {GateKind::CRY, "cry"},
    {GateKind::CP, "cp"},
    {GateKind::RZZ, "rzz"},
}};

} // namespace

std::string_view gate_name(GateKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
    if (name == "cu1") {
        return GateKind::CP;
    }
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

Gate Gate::one_qubit(GateKind kind, std::uint32_t q) {
    if (is_two_qubit(kind)) {
        throw std::invalid_argument("Gate: two-qubit kind given one operand");
    }
    if (is_parametric(kind)) {
        throw std::invalid_argument("Gate: parametric kind requires an angle");
    }
    Gate g;
    g.kind = kind;
    g.q0 = q;
    return g;
}

Gate Gate::one_qubit(GateKind kind, std::uint32_t q, double angle) {
    if (is_two_qubit(kind) || !is_parametric(kind)) {
        throw std::invalid_argument("Gate: kind/operand shape mismatch");
    }
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("Gate: angle must be finite");
    }
    Gate g;
    g.kind = kind;
    g.q0 = q;
    g.angle = angle;
    return g;
}

Gate Gate::two_qubit(GateKind kind, std::uint32_t a, std::uint32_t b) {
    if (!is_two_qubit(kind)) {
        throw std::invalid_argument("Gate: one-qubit kind given two operands");
    }
    if (is_parametric(kind)) {
        throw std::invalid_argument("Gate: parametric kind requires an angle");
    }
    if (a == b) {
        throw std::invalid_argument("Gate: duplicate qubit operand");
    }
    Gate g;
    g.kind = kind;
    g.q0 = a;
    g.q1 = b;
    return g;
}

Gate Gate::two_qubit(GateKind kind, std::uint32_t a, std::uint32_t b, double angle) {
    if (!is_two_qubit(kind) || !is_parametric(kind)) {
        throw std::invalid_argument("Gate: kind/operand shape mismatch");
    }
    if (a == b) {
        throw std::invalid_argument("Gate: duplicate qubit operand");
    }
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("Gate: angle must be finite");
    }
    Gate g;
    g.kind = kind;
    g.q0 = a;
    g.q1 = b;
    g.angle = angle;
    return g;
}

std::size_t count_gates(const Circuit& circuit, std::optional<GateKind> kind) {
    if (!kind) {
        return circuit.size();
    }
    std::size_t n = 0;
    for (const auto& g : circuit) {
        if (g.kind == *kind) {
            ++n;
        }
    }
    return n;
}

// ---------------------------------------------------------------------------
// Gate unitaries
// ---------------------------------------------------------------------------

namespace {

CMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
    CMatrix m(2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

CMatrix rz_matrix(double theta) {
    const cplx e0 = std::polar(1.0, -theta / 2.0);
    const cplx e1 = std::polar(1.0, theta / 2.0);
    return mat2(e0, 0.0, 0.0, e1);
}

CMatrix rx_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return mat2(c, cplx(0.0, -s), cplx(0.0, -s), c);
}

CMatrix ry_matrix(double theta) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    return mat2(c, -s, s, c);
}

/// diag(I, U) in |q0 q1> order with q0 the control.
CMatrix controlled(const CMatrix& u) {
    CMatrix m = CMatrix::identity(4);
    m(2, 2) = u(0, 0);
    m(2, 3) = u(0, 1);
    m(3, 2) = u(1, 0);
    m(3, 3) = u(1, 1);
    return m;
}

} // namespace

CMatrix gate_unitary(const Gate& gate) {
    using std::numbers::sqrt2;
    switch (gate.kind) {
    case GateKind::X:
        return mat2(0.0, 1.0, 1.0, 0.0);
    case GateKind::SX:
        return mat2(cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(0.5, -0.5), cplx(0.5, 0.5));
    case GateKind::RZ:
        return rz_matrix(gate.angle);
    case GateKind::ID:
        return CMatrix::identity(2);
    case GateKind::H:
        return mat2(1.0 / sqrt2, 1.0 / sqrt2, 1.0 / sqrt2, -1.0 / sqrt2);
    case GateKind::CX:
        return controlled(mat2(0.0, 1.0, 1.0, 0.0));
    case GateKind::SWAP: {
        CMatrix m(4);
        m(0, 0) = 1.0;
        m(1, 2) = 1.0;
        m(2, 1) = 1.0;
        m(3, 3) = 1.0;
        return m;
    }
    case GateKind::CRZ:
        return controlled(rz_matrix(gate.angle));
    case GateKind::CRX:
        return controlled(rx_matrix(gate.angle));
    case GateKind::CRY:
        return controlled(ry_matrix(gate.angle));
    case GateKind::CP: {
        CMatrix m = CMatrix::identity(4);
        m(3, 3) = std::polar(1.0, gate.angle);
        return m;
    }
    case GateKind::RZZ: {
        CMatrix m(4);
        const cplx em = std::polar(1.0, -gate.angle / 2.0);
        const cplx ep = std::polar(1.0, gate.angle / 2.0);
        m(0, 0) = em;
        m(1, 1) = ep;
        m(2, 2) = ep;
        m(3, 3) = em;
        return m;
    }
    }
    throw std::invalid_argument("gate_unitary: unknown kind");
}

// ---------------------------------------------------------------------------
// OpenQASM 2.0 subset parser
// ---------------------------------------------------------------------------

QasmParseError::QasmParseError(std::string message, int line, int column)
    : std::runtime_error(message + " (line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

namespace {

enum class TokKind { Ident, Number, Symbol, String, End };

struct Token {
    TokKind kind;
    std::string text;
    double value = 0.0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw QasmParseError(msg, tok_.line, tok_.col);
    }

private:
    void advance() {
        skip_space_and_comments();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_ = {TokKind::End, "", 0.0, line_, col_};
            return;
        }
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                bump();
            }
            tok_.kind = TokKind::Ident;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
                bump();
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                bump();
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                    bump();
                }
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    bump();
                }
            }
            tok_.kind = TokKind::Number;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            const char* first = tok_.text.data();
            const char* last = first + tok_.text.size();
            auto [end, ec] = std::from_chars(first, last, tok_.value);
            if (ec != std::errc{} || end != last) {
                throw QasmParseError("malformed number '" + tok_.text + "'", tok_.line, tok_.col);
            }
            return;
        }
        if (c == '"') {
            bump();
            std::size_t start = pos_;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                bump();
            }
            if (pos_ >= src_.size()) {
                throw QasmParseError("unterminated string", tok_.line, tok_.col);
            }
            tok_.kind = TokKind::String;
            tok_.text = std::string(src_.substr(start, pos_ - start));
            bump(); // closing quote
            return;
        }
        tok_.kind = TokKind::Symbol;
        tok_.text = std::string(1, c);
        bump();
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    bump();
                }
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    Circuit parse() {
        maybe_header();
        Circuit circuit;
        bool have_qreg = false;
        std::string reg_name;

        while (lex_.peek().kind != TokKind::End) {
            const Token t = lex_.take();
            if (t.kind != TokKind::Ident) {
                throw QasmParseError("expected a statement, got '" + t.text + "'", t.line, t.col);
            }
            if (t.text == "qreg") {
                if (have_qreg) {
                    throw QasmParseError("multiple quantum registers are not supported", t.line,
                                         t.col);
                }
                auto [name, size] = parse_reg_decl();
                reg_name = name;
                circuit = Circuit(size);
                have_qreg = true;
                continue;
            }
            if (t.text == "barrier") {
                while (lex_.peek().kind != TokKind::End &&
                       !(lex_.peek().kind == TokKind::Symbol && lex_.peek().text == ";")) {
                    lex_.take();
                }
                expect_symbol(";");
                continue;
            }
            if (t.text == "creg" || t.text == "measure" || t.text == "reset" ||
                t.text == "gate" || t.text == "if" || t.text == "opaque") {
                throw QasmParseError("unsupported statement '" + t.text + "'", t.line, t.col);
            }
            // gate application
            const auto kind = gate_kind_from_name(t.text);
            if (!kind) {
                throw QasmParseError("unsupported gate '" + t.text + "'", t.line, t.col);
            }
            if (!have_qreg) {
                throw QasmParseError("gate before qreg declaration", t.line, t.col);
            }
            parse_gate(circuit, *kind, reg_name, t);
        }
        if (!have_qreg) {
            const Token& t = lex_.peek();
            throw QasmParseError("missing qreg declaration", t.line, t.col);
        }
        return circuit;
    }

private:
    void maybe_header() {
        if (lex_.peek().kind == TokKind::Ident && lex_.peek().text == "OPENQASM") {
            const Token t = lex_.take();
            const Token v = lex_.take();
            if (v.kind != TokKind::Number || v.text != "2.0") {
                throw QasmParseError("unsupported OPENQASM version '" + v.text + "'", t.line,
                                     t.col);
            }
            expect_symbol(";");
        }
        while (lex_.peek().kind == TokKind::Ident && lex_.peek().text == "include") {
            lex_.take();
            const Token f = lex_.take();
            if (f.kind != TokKind::String) {
                throw QasmParseError("expected include file name", f.line, f.col);
            }
            expect_symbol(";");
        }
    }

    std::pair<std::string, std::uint32_t> parse_reg_decl() {
        const Token name = lex_.take();
        if (name.kind != TokKind::Ident) {
            throw QasmParseError("expected register name", name.line, name.col);
        }
        expect_symbol("[");
        const Token size = lex_.take();
        if (size.kind != TokKind::Number || size.value != std::floor(size.value) ||
            size.value < 1.0) {
            throw QasmParseError("register size must be a positive integer", size.line, size.col);
        }
        expect_symbol("]");
        expect_symbol(";");
        return {name.text, static_cast<std::uint32_t>(size.value)};
    }

    void parse_gate(Circuit& circuit, GateKind kind, const std::string& reg_name,
                    const Token& at) {
        std::vector<double> params;
        if (lex_.peek().kind == TokKind::Symbol && lex_.peek().text == "(") {
            lex_.take();
            params.push_back(parse_expr());
            while (lex_.peek().kind == TokKind::Symbol && lex_.peek().text == ",") {
                lex_.take();
                params.push_back(parse_expr());
            }
            expect_symbol(")");
        }
        const std::size_t want_params = is_parametric(kind) ? 1 : 0;
        if (params.size() != want_params) {
            throw QasmParseError("gate '" + std::string(gate_name(kind)) + "' expects " +
                                     std::to_string(want_params) + " parameter(s), got " +
                                     std::to_string(params.size()),
                                 at.line, at.col);
        }
        if (want_params == 1 && !std::isfinite(params[0])) {
            throw QasmParseError("angle expression is not finite", at.line, at.col);
        }

        std::vector<std::uint32_t> qubits;
        qubits.push_back(parse_operand(circuit, reg_name));
        while (lex_.peek().kind == TokKind::Symbol && lex_.peek().text == ",") {
            lex_.take();
            qubits.push_back(parse_operand(circuit, reg_name));
        }
        expect_symbol(";");

        const std::size_t want_qubits = is_two_qubit(kind) ? 2 : 1;
        if (qubits.size() != want_qubits) {
            throw QasmParseError("gate '" + std::string(gate_name(kind)) + "' expects " +
                                     std::to_string(want_qubits) + " operand(s), got " +
                                     std::to_string(qubits.size()),
                                 at.line, at.col);
        }
        if (want_qubits == 2 && qubits[0] == qubits[1]) {
            throw QasmParseError("duplicate qubit operand", at.line, at.col);
        }

        if (want_qubits == 1) {
            circuit.add(want_params ? Gate::one_qubit(kind, qubits[0], params[0])
                                    : Gate::one_qubit(kind, qubits[0]));
        } else {
            circuit.add(want_params ? Gate::two_qubit(kind, qubits[0], qubits[1], params[0])
                                    : Gate::two_qubit(kind, qubits[0], qubits[1]));
        }
    }

    std::uint32_t parse_operand(const Circuit& circuit, const std::string& reg_name) {
        const Token name = lex_.take();
        if (name.kind != TokKind::Ident) {
            throw QasmParseError("expected qubit operand", name.line, name.col);
        }
        if (name.text != reg_name) {
            throw QasmParseError("unknown register '" + name.text + "'", name.line, name.col);
        }
        expect_symbol("[");
        const Token idx = lex_.take();
        if (idx.kind != TokKind::Number || idx.value != std::floor(idx.value) || idx.value < 0.0) {
            throw QasmParseError("qubit index must be a non-negative integer", idx.line, idx.col);
        }
        if (idx.value >= static_cast<double>(circuit.num_qubits())) {
            throw QasmParseError("qubit index " + idx.text + " out of range (register size " +
                                     std::to_string(circuit.num_qubits()) + ")",
                                 idx.line, idx.col);
        }
        expect_symbol("]");
        return static_cast<std::uint32_t>(idx.value);
    }

    // expr := term (('+'|'-') term)*
    double parse_expr() {
        double v = parse_term();
        while (lex_.peek().kind == TokKind::Symbol &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            const std::string op = lex_.take().text;
            const double rhs = parse_term();
            v = (op == "+") ? v + rhs : v - rhs;
        }
        return v;
    }

    double parse_term() {
        double v = parse_factor();
        while (lex_.peek().kind == TokKind::Symbol &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            const std::string op = lex_.take().text;
            const double rhs = parse_factor();
            v = (op == "*") ? v * rhs : v / rhs;
        }
        return v;
    }

    double parse_factor() {
        const Token t = lex_.take();
        if (t.kind == TokKind::Symbol && t.text == "-") {
            return -parse_factor();
        }
        if (t.kind == TokKind::Symbol && t.text == "+") {
            return parse_factor();
        }
        if (t.kind == TokKind::Symbol && t.text == "(") {
            const double v = parse_expr();
            expect_symbol(")");
            return v;
        }
        if (t.kind == TokKind::Number) {
            return t.value;
        }
        if (t.kind == TokKind::Ident && t.text == "pi") {
            return std::numbers::pi;
        }
        throw QasmParseError("malformed angle expression at '" + t.text + "'", t.line, t.col);
    }

    void expect_symbol(const std::string& s) {
        const Token t = lex_.take();
        if (t.kind != TokKind::Symbol || t.text != s) {
            throw QasmParseError("expected '" + s + "', got '" + t.text + "'", t.line, t.col);
        }
    }

    Lexer lex_;
};

} // namespace

Circuit parse_qasm(std::string_view text) {
    return Parser(text).parse();
}

std::string emit_qasm(const Circuit& circuit) {
    std::string out;
    out.reserve(64 + circuit.size() * 24);
    out += "OPENQASM 2.0;\n";
    out += "include \"qelib1.inc\";\n";
    out += "qreg q[" + std::to_string(circuit.num_qubits()) + "];\n";
    char buf[40];
    for (const auto& g : circuit) {
        out += gate_name(g.kind);
        if (is_parametric(g.kind)) {
            std::snprintf(buf, sizeof(buf), "(%.17g)", g.angle);
            out += buf;
        }
        out += " q[" + std::to_string(g.q0) + "]";
        if (is_two_qubit(g.kind)) {
            out += ",q[" + std::to_string(g.q1) + "]";
        }
        out += ";\n";
    }
    return out;
}

} // namespace qprune
