#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "degrh/common.hpp"

namespace degrh::expr {

/// Parse failure; position is a 0-based offset into the source text.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, int position)
        : ValidationError(msg + " (at position " + std::to_string(position) + ")"),
          pos(position) {}
    int pos;
};

/// Runtime failure while evaluating a fixed tree (division by zero,
/// non-finite intermediate). Carries the offending node's source position.
class EvalError : public NumericError {
public:
    EvalError(const std::string& msg, int position)
        : NumericError(msg + " (node at position " + std::to_string(position) + ")"),
          pos(position) {}
    int pos;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Number, Variable, Constant, Unary, Binary };
    Kind kind{};
    double number = 0.0;
    std::string name;  // variable name, function name, or constant name
    char op = 0;       // one of + - * / ^ for Kind::Binary
    NodePtr a, b;
    int pos = 0;
};

using Bindings = std::map<std::string, cplx>;

/// Immutable parsed expression over a declared variable set.
class Expression {
public:
    Expression() = default;
    const NodePtr& root() const { return root_; }
    const std::vector<std::string>& variables() const { return vars_; }
    cplx evaluate(const Bindings& bindings) const;
    std::string pretty_print() const;

    friend Expression parse(const std::string& source, const std::vector<std::string>& variables);

private:
    NodePtr root_;
    std::vector<std::string> vars_;
};

/// Recursive-descent parse with standard precedence: ^ binds tightest (right
/// associative), then unary minus, then * /, then + -.
Expression parse(const std::string& source, const std::vector<std::string>& variables);

}  // namespace degrh::expr
