#include "emh/expression.hpp"

#include "emh/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace emh {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::unknown_variable: return "unknown-variable";
    case ErrorKind::domain: return "domain";
    case ErrorKind::immersion: return "immersion";
    case ErrorKind::degenerate_metric: return "degenerate-metric";
    case ErrorKind::transversality: return "transversality";
    case ErrorKind::singular_basis: return "singular-basis";
    case ErrorKind::not_tangent: return "not-tangent";
    case ErrorKind::point_at_infinity: return "point-at-infinity";
    case ErrorKind::null_space: return "null-space";
    case ErrorKind::not_converged: return "not-converged";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

namespace {

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr make_number(double v)
{
    Node n;
    n.kind = NodeKind::number;
    n.number = v;
    return make(std::move(n));
}

// Negative literals are stored as negate(number) so printing round-trips.
NodePtr make_literal(double v)
{
    if (!(v < 0.0)) return make_number(v);
    Node n;
    n.kind = NodeKind::negate;
    n.lhs = make_number(-v);
    return make(std::move(n));
}

NodePtr make_binary(NodeKind kind, NodePtr lhs, NodePtr rhs)
{
    Node n;
    n.kind = kind;
    n.lhs = std::move(lhs);
    n.rhs = std::move(rhs);
    return make(std::move(n));
}

constexpr std::array<std::pair<std::string_view, Function>, 5> functions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"sqrt", Function::sqrt},
    {"exp", Function::exp},
    {"cbrt", Function::cbrt},
}};

std::string_view function_name(Function f)
{
    for (const auto& [name, fn] : functions)
        if (fn == f) return name;
    return "?";
}

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

    NodePtr parse()
    {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }

    NodePtr expr()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make_binary(NodeKind::add, lhs, term());
            else if (accept('-')) lhs = make_binary(NodeKind::subtract, lhs, term());
            else return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make_binary(NodeKind::multiply, lhs, unary());
            else if (accept('/')) lhs = make_binary(NodeKind::divide, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) {
            Node n;
            n.kind = NodeKind::negate;
            n.lhs = unary();
            return make(std::move(n));
        }
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        if (!accept('^')) return base;
        skip_ws();
        bool negative = false;
        bool paren = accept('(');
        if (accept('-')) negative = true;
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) throw SyntaxError("exponent must be an integer literal", start);
        int value = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{}) throw SyntaxError("exponent out of range", start);
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
            throw SyntaxError("exponent must be an integer literal", start);
        if (paren) expect(')');
        Node n;
        n.kind = NodeKind::power;
        n.lhs = base;
        n.exponent = negative ? -value : value;
        return make(std::move(n));
    }

    NodePtr primary()
    {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of formula", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr number()
    {
        const std::size_t start = pos_;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
        if (ec != std::errc{}) throw SyntaxError("malformed number", start);
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return make_number(v);
    }

    NodePtr name()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view id = text_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            for (const auto& [fname, fn] : functions) {
                if (fname == id) {
                    ++pos_;
                    Node n;
                    n.kind = NodeKind::call;
                    n.function = fn;
                    n.lhs = expr();
                    expect(')');
                    return make(std::move(n));
                }
            }
            throw SyntaxError("unknown function '" + std::string(id) + "'", start);
        }
        auto it = std::find(vars_.begin(), vars_.end(), id);
        if (it == vars_.end()) throw Error(ErrorKind::unknown_variable, "unknown variable " + std::string(id));
        Node n;
        n.kind = NodeKind::variable;
        n.variable = static_cast<int>(it - vars_.begin());
        return make(std::move(n));
    }

    std::string_view text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

std::string format_number(double v)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), ptr);
}

void print(const NodePtr& n, const std::vector<std::string>& vars, std::string& out)
{
    switch (n->kind) {
    case NodeKind::number:
        out += format_number(n->number);
        return;
    case NodeKind::variable: out += vars.at(n->variable); return;
    case NodeKind::negate:
        out += "(-";
        print(n->lhs, vars, out);
        out += ")";
        return;
    case NodeKind::power:
        out += "(";
        print(n->lhs, vars, out);
        out += "^" + std::string(n->exponent < 0 ? "(" : "") + std::to_string(n->exponent) +
               (n->exponent < 0 ? ")" : "") + ")";
        return;
    case NodeKind::call:
        out += function_name(n->function);
        out += "(";
        print(n->lhs, vars, out);
        out += ")";
        return;
    default: break;
    }
    const char* op = n->kind == NodeKind::add        ? " + "
                     : n->kind == NodeKind::subtract ? " - "
                     : n->kind == NodeKind::multiply ? " * "
                                                     : " / ";
    out += "(";
    print(n->lhs, vars, out);
    out += op;
    print(n->rhs, vars, out);
    out += ")";
}

double apply(Function f, double x)
{
    switch (f) {
    case Function::sin: return std::sin(x);
    case Function::cos: return std::cos(x);
    case Function::sqrt:
        if (!(x > 0.0)) throw Error(ErrorKind::domain, "sqrt of non-positive value");
        return std::sqrt(x);
    case Function::exp: return std::exp(x);
    case Function::cbrt: return signed_cbrt(x);
    }
    return 0.0;
}

Jet apply(Function f, const Jet& x)
{
    switch (f) {
    case Function::sin: return sin(x);
    case Function::cos: return cos(x);
    case Function::sqrt: return sqrt(x);
    case Function::exp: return exp(x);
    case Function::cbrt: return cbrt(x);
    }
    return x;
}

double eval(const Node& n, std::span<const double> at)
{
    switch (n.kind) {
    case NodeKind::number: return n.number;
    case NodeKind::variable: return at[n.variable];
    case NodeKind::negate: return -eval(*n.lhs, at);
    case NodeKind::add: return eval(*n.lhs, at) + eval(*n.rhs, at);
    case NodeKind::subtract: return eval(*n.lhs, at) - eval(*n.rhs, at);
    case NodeKind::multiply: return eval(*n.lhs, at) * eval(*n.rhs, at);
    case NodeKind::divide: {
        const double d = eval(*n.rhs, at);
        if (d == 0.0) throw Error(ErrorKind::domain, "division by zero");
        return eval(*n.lhs, at) / d;
    }
    case NodeKind::power: {
        const double b = eval(*n.lhs, at);
        if (n.exponent < 0 && b == 0.0) throw Error(ErrorKind::domain, "negative power of zero");
        double r = 1.0;
        for (int k = 0; k < std::abs(n.exponent); ++k) r *= b;
        return n.exponent < 0 ? 1.0 / r : r;
    }
    case NodeKind::call: return apply(n.function, eval(*n.lhs, at));
    }
    return 0.0;
}

Jet eval(const Node& n, std::span<const Jet> at)
{
    switch (n.kind) {
    case NodeKind::number: return Jet::constant(at[0].layout(), n.number);
    case NodeKind::variable: return at[n.variable];
    case NodeKind::negate: return -eval(*n.lhs, at);
    case NodeKind::add: return eval(*n.lhs, at) + eval(*n.rhs, at);
    case NodeKind::subtract: return eval(*n.lhs, at) - eval(*n.rhs, at);
    case NodeKind::multiply: {
        // Constant factors are common in formulas; skip the full product for them.
        if (n.lhs->kind == NodeKind::number) return n.lhs->number * eval(*n.rhs, at);
        if (n.rhs->kind == NodeKind::number) return eval(*n.lhs, at) * n.rhs->number;
        return eval(*n.lhs, at) * eval(*n.rhs, at);
    }
    case NodeKind::divide: {
        if (n.rhs->kind == NodeKind::number) {
            if (n.rhs->number == 0.0) throw Error(ErrorKind::domain, "division by zero");
            return eval(*n.lhs, at) * (1.0 / n.rhs->number);
        }
        return eval(*n.lhs, at) / eval(*n.rhs, at);
    }
    case NodeKind::power: return ipow(eval(*n.lhs, at), n.exponent);
    case NodeKind::call: return apply(n.function, eval(*n.lhs, at));
    }
    return at[0];
}

NodePtr rebind_node(const NodePtr& n, const std::vector<std::string>& from, const std::vector<std::string>& to)
{
    if (!n) return n;
    Node copy = *n;
    if (n->kind == NodeKind::variable) {
        auto it = std::find(to.begin(), to.end(), from.at(n->variable));
        if (it == to.end()) throw Error(ErrorKind::unknown_variable, "unknown variable " + from.at(n->variable));
        copy.variable = static_cast<int>(it - to.begin());
    }
    copy.lhs = rebind_node(n->lhs, from, to);
    copy.rhs = rebind_node(n->rhs, from, to);
    return make(std::move(copy));
}

} // namespace

Expression::Expression(NodePtr root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables))
{
}

Expression Expression::parse(std::string_view text, std::vector<std::string> variables)
{
    NodePtr root = Parser(text, variables).parse();
    return Expression(std::move(root), std::move(variables));
}

Expression Expression::constant(double value, std::vector<std::string> variables)
{
    return Expression(make_literal(value), std::move(variables));
}

Expression Expression::variable(std::string_view name, std::vector<std::string> variables)
{
    auto it = std::find(variables.begin(), variables.end(), name);
    if (it == variables.end()) throw Error(ErrorKind::unknown_variable, "unknown variable " + std::string(name));
    Node n;
    n.kind = NodeKind::variable;
    n.variable = static_cast<int>(it - variables.begin());
    return Expression(make(std::move(n)), std::move(variables));
}

std::string Expression::to_string() const
{
    std::string out;
    if (root_) print(root_, variables_, out);
    return out;
}

double Expression::evaluate(std::span<const double> at) const
{
    if (at.size() != variables_.size()) throw Error(ErrorKind::domain, "evaluate: wrong number of coordinates");
    return eval(*root_, at);
}

Jet Expression::evaluate(std::span<const Jet> at) const
{
    if (at.size() != variables_.size() || at.empty())
        throw Error(ErrorKind::domain, "evaluate: wrong number of coordinates");
    return eval(*root_, at);
}

Expression Expression::rebind(const std::vector<std::string>& variables) const
{
    return Expression(rebind_node(root_, variables_, variables), variables);
}

bool structurally_equal(const NodePtr& a, const NodePtr& b)
{
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case NodeKind::number: return a->number == b->number;
    case NodeKind::variable: return a->variable == b->variable;
    case NodeKind::power:
        return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    case NodeKind::call:
        return a->function == b->function && structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

bool operator==(const Expression& a, const Expression& b)
{
    return a.variables_ == b.variables_ && structurally_equal(a.root_, b.root_);
}

namespace {

void check_same_vars(const Expression& a, const Expression& b)
{
    if (a.variables() != b.variables())
        throw Error(ErrorKind::unknown_variable, "expressions declare different variable lists");
}

} // namespace

Expression operator+(const Expression& a, const Expression& b)
{
    check_same_vars(a, b);
    return Expression(make_binary(NodeKind::add, a.root(), b.root()), a.variables());
}

Expression operator-(const Expression& a, const Expression& b)
{
    check_same_vars(a, b);
    return Expression(make_binary(NodeKind::subtract, a.root(), b.root()), a.variables());
}

Expression operator*(const Expression& a, const Expression& b)
{
    check_same_vars(a, b);
    return Expression(make_binary(NodeKind::multiply, a.root(), b.root()), a.variables());
}

Expression operator/(const Expression& a, const Expression& b)
{
    check_same_vars(a, b);
    return Expression(make_binary(NodeKind::divide, a.root(), b.root()), a.variables());
}

Expression operator-(const Expression& a)
{
    Node n;
    n.kind = NodeKind::negate;
    n.lhs = a.root();
    return Expression(make(std::move(n)), a.variables());
}

Expression operator*(double s, const Expression& a)
{
    return Expression(make_binary(NodeKind::multiply, make_literal(s), a.root()), a.variables());
}

Expression operator+(const Expression& a, double s)
{
    return Expression(make_binary(NodeKind::add, a.root(), make_literal(s)), a.variables());
}

Jet eval_jet(const Expression& e, std::span<const double> at, int order)
{
    if (order < 0 || order > 4) throw Error(ErrorKind::domain, "eval_jet: order must be in [0, 4]");
    if (at.size() != e.arity()) throw Error(ErrorKind::domain, "eval_jet: wrong number of coordinates");
    if (e.arity() == 0) return Jet::constant(JetLayout::get(0, 0), e.evaluate(at));
    const JetLayout& layout = JetLayout::get(static_cast<int>(e.arity()), order);
    std::vector<Jet> vars;
    vars.reserve(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) vars.push_back(Jet::variable(layout, static_cast<int>(i), at[i]));
    return e.evaluate(std::span<const Jet>(vars));
}

} // namespace emh
