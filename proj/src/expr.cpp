#include "degrh/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace degrh::expr {

namespace {

const char* kFunctions[] = {"sin", "cos", "exp", "sqrt", "abs", "arg", "re", "im", "conj", "neg"};

bool is_function(const std::string& s) {
    return std::find(std::begin(kFunctions), std::end(kFunctions), s) != std::end(kFunctions);
}

bool is_constant(const std::string& s) { return s == "pi" || s == "e" || s == "i"; }

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars)
        : src_(src), vars_(vars) {}

    NodePtr run() {
        skip_ws();
        if (eof()) throw ParseError("empty expression", 0);
        NodePtr e = expression();
        skip_ws();
        if (!eof()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& src_;
    const std::vector<std::string>& vars_;
    int pos_ = 0;

    bool eof() const { return pos_ >= static_cast<int>(src_.size()); }
    char peek() const { return eof() ? '\0' : src_[pos_]; }
    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
    }

    NodePtr make(Node n) { return std::make_shared<Node>(std::move(n)); }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '+' && c != '-') return lhs;
            const int p = pos_;
            ++pos_;
            NodePtr rhs = term();
            lhs = make({Node::Kind::Binary, 0.0, "", c, lhs, rhs, p});
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c != '*' && c != '/') return lhs;
            const int p = pos_;
            ++pos_;
            NodePtr rhs = unary();
            lhs = make({Node::Kind::Binary, 0.0, "", c, lhs, rhs, p});
        }
    }

    NodePtr unary() {
        skip_ws();
        if (peek() == '-') {
            const int p = pos_;
            ++pos_;
            NodePtr operand = unary();
            return make({Node::Kind::Unary, 0.0, "neg", 0, operand, nullptr, p});
        }
        if (peek() == '+') {
            ++pos_;
            return unary();
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        skip_ws();
        if (peek() == '^') {
            const int p = pos_;
            ++pos_;
            NodePtr ex = unary();  // right associative; allows x^-2
            return make({Node::Kind::Binary, 0.0, "", '^', base, ex, p});
        }
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (eof()) throw ParseError("unexpected end of input", pos_);
        const char c = peek();
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            expect(')', "')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr number() {
        const int start = pos_;
        while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
            ++pos_;
        if (!eof() && (peek() == 'e' || peek() == 'E')) {
            const int save = pos_;
            ++pos_;
            if (!eof() && (peek() == '+' || peek() == '-')) ++pos_;
            if (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
                while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            } else {
                pos_ = save;  // 'e' belongs to the next token (the constant e)
            }
        }
        const std::string text = src_.substr(start, pos_ - start);
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return make({Node::Kind::Number, v, "", 0, nullptr, nullptr, start});
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + text + "'", start);
        }
    }

    NodePtr identifier() {
        const int start = pos_;
        while (!eof() &&
               (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            ++pos_;
        const std::string name = src_.substr(start, pos_ - start);
        skip_ws();
        if (peek() == '(') {
            if (!is_function(name))
                throw ParseError("unknown function '" + name + "'", start);
            ++pos_;
            NodePtr arg = expression();
            expect(')', "')'");
            return make({Node::Kind::Unary, 0.0, name, 0, arg, nullptr, start});
        }
        if (std::find(vars_.begin(), vars_.end(), name) != vars_.end())
            return make({Node::Kind::Variable, 0.0, name, 0, nullptr, nullptr, start});
        if (is_constant(name))
            return make({Node::Kind::Constant, 0.0, name, 0, nullptr, nullptr, start});
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

// Exactly-real values are treated as limits from the upper half plane so that
// sqrt, arg and non-integer powers of negative reals take principal values.
cplx canon(const cplx& v) {
    if (v.imag() == 0.0) return cplx(v.real(), 0.0);
    return v;
}

cplx complex_pow(const cplx& base, const cplx& ex, int pos) {
    // Integer exponents by repeated multiplication: keeps real data exactly
    // real and handles zero bases.
    if (ex.imag() == 0.0 && near_integer(ex.real()) && std::abs(ex.real()) <= 1024.0) {
        long n = std::lround(ex.real());
        if (n == 0) return cplx(1.0, 0.0);
        const bool neg = n < 0;
        unsigned long m = neg ? -static_cast<unsigned long>(n) : static_cast<unsigned long>(n);
        cplx acc(1.0, 0.0), b = base;
        while (m) {
            if (m & 1UL) acc *= b;
            b *= b;
            m >>= 1UL;
        }
        if (neg) {
            if (std::abs(acc) == 0.0) throw EvalError("zero raised to a negative power", pos);
            return cplx(1.0, 0.0) / acc;
        }
        return acc;
    }
    if (std::abs(base) == 0.0) {
        if (ex.imag() == 0.0 && ex.real() > 0.0) return cplx(0.0, 0.0);
        throw EvalError("zero base with non-positive exponent", pos);
    }
    return std::exp(ex * std::log(canon(base)));
}

cplx eval_node(const Node& n, const Bindings& bindings) {
    switch (n.kind) {
        case Node::Kind::Number:
            return cplx(n.number, 0.0);
        case Node::Kind::Constant:
            if (n.name == "pi") return cplx(kPi, 0.0);
            if (n.name == "e") return cplx(std::exp(1.0), 0.0);
            return cplx(0.0, 1.0);  // i
        case Node::Kind::Variable: {
            auto it = bindings.find(n.name);
            if (it == bindings.end())
                throw EvalError("unbound variable '" + n.name + "'", n.pos);
            return it->second;
        }
        case Node::Kind::Unary: {
            const cplx v = eval_node(*n.a, bindings);
            cplx r;
            if (n.name == "neg")
                r = -v;
            else if (n.name == "sin")
                r = std::sin(v);
            else if (n.name == "cos")
                r = std::cos(v);
            else if (n.name == "exp")
                r = std::exp(v);
            else if (n.name == "sqrt")
                r = std::sqrt(canon(v));
            else if (n.name == "abs")
                r = cplx(std::abs(v), 0.0);
            else if (n.name == "arg")
                r = cplx(std::arg(canon(v)), 0.0);
            else if (n.name == "re")
                r = cplx(v.real(), 0.0);
            else if (n.name == "im")
                r = cplx(v.imag(), 0.0);
            else if (n.name == "conj")
                r = std::conj(v);
            else
                throw EvalError("unknown function '" + n.name + "'", n.pos);
            if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
                throw EvalError("non-finite result of " + n.name, n.pos);
            return r;
        }
        case Node::Kind::Binary: {
            const cplx a = eval_node(*n.a, bindings);
            const cplx b = eval_node(*n.b, bindings);
            cplx r;
            switch (n.op) {
                case '+': r = a + b; break;
                case '-': r = a - b; break;
                case '*': r = a * b; break;
                case '/':
                    if (std::abs(b) == 0.0) throw EvalError("division by zero", n.pos);
                    r = a / b;
                    break;
                case '^': r = complex_pow(a, b, n.pos); break;
                default: throw EvalError("unknown operator", n.pos);
            }
            if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
                throw EvalError(std::string("non-finite result of '") + n.op + "'", n.pos);
            return r;
        }
    }
    throw EvalError("corrupt expression tree", n.pos);
}

void print_node(const Node& n, std::ostream& os) {
    switch (n.kind) {
        case Node::Kind::Number: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n.number;
            os << tmp.str();
            break;
        }
        case Node::Kind::Constant:
        case Node::Kind::Variable:
            os << n.name;
            break;
        case Node::Kind::Unary:
            if (n.name == "neg") {
                os << "(-";
                print_node(*n.a, os);
                os << ")";
            } else {
                os << n.name << "(";
                print_node(*n.a, os);
                os << ")";
            }
            break;
        case Node::Kind::Binary:
            os << "(";
            print_node(*n.a, os);
            os << n.op;
            print_node(*n.b, os);
            os << ")";
            break;
    }
}

}  // namespace

cplx Expression::evaluate(const Bindings& bindings) const {
    if (!root_) throw NumericError("evaluate: empty expression");
    return eval_node(*root_, bindings);
}

std::string Expression::pretty_print() const {
    std::ostringstream os;
    if (root_) print_node(*root_, os);
    return os.str();
}

Expression parse(const std::string& source, const std::vector<std::string>& variables) {
    if (source.empty()) throw ParseError("empty expression", 0);
    Parser p(source, variables);
    Expression e;
    e.root_ = p.run();
    e.vars_ = variables;
    return e;
}

}  // namespace degrh::expr
