#pragma once

#include "emh/jet.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emh {

enum class NodeKind { number, variable, negate, add, subtract, multiply, divide, power, call };

enum class Function { sin, cos, sqrt, exp, cbrt };

/// Immutable AST node. Children are shared, so sub-trees are cheap to reuse.
struct Node {
    NodeKind kind = NodeKind::number;
    double number = 0.0;        // NodeKind::number
    int variable = -1;          // NodeKind::variable
    int exponent = 0;           // NodeKind::power
    Function function{};        // NodeKind::call
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

/// A scalar formula over a declared, ordered list of variables.
///
/// Grammar (whitespace insignificant):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ['-'] integer)?
///   primary := number | name | name '(' expr ')' | '(' expr ')'
/// Functions: sin, cos, sqrt, exp, cbrt. Exponents must be integer literals.
class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, std::vector<std::string> variables);

    static Expression parse(std::string_view text, std::vector<std::string> variables);
    static Expression constant(double value, std::vector<std::string> variables);
    static Expression variable(std::string_view name, std::vector<std::string> variables);

    const NodePtr& root() const noexcept { return root_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    std::size_t arity() const noexcept { return variables_.size(); }

    /// Fully parenthesised text that parses back to the same tree.
    std::string to_string() const;

    double evaluate(std::span<const double> at) const;

    /// Substitutes the given jets for the variables, in declaration order.
    Jet evaluate(std::span<const Jet> at) const;

    /// Rebinds variable indices onto a different variable list (names must exist there).
    Expression rebind(const std::vector<std::string>& variables) const;

    friend bool operator==(const Expression& a, const Expression& b);

    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    friend Expression operator/(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a);
    friend Expression operator*(double s, const Expression& a);
    friend Expression operator+(const Expression& a, double s);

private:
    NodePtr root_;
    std::vector<std::string> variables_;
};

/// Value and all partial derivatives up to `order` at `at`.
Jet eval_jet(const Expression& e, std::span<const double> at, int order = 3);

bool structurally_equal(const NodePtr& a, const NodePtr& b);

} // namespace emh
