#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <vector>

namespace emh {

/// Enumeration of multi-indices of total degree <= order over a fixed number of
/// variables, in graded order. Layouts are interned; get() returns a stable reference.
class JetLayout {
public:
    static constexpr int max_vars = 4;

    static const JetLayout& get(int nvars, int order);

    int nvars() const noexcept { return nvars_; }
    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return exponents_.size(); }

    const std::array<std::uint8_t, max_vars>& exponents(std::size_t i) const { return exponents_[i]; }
    int degree(std::size_t i) const { return degrees_[i]; }

    /// Position of a multi-index, or npos when its degree exceeds the order.
    std::size_t index(const std::array<std::uint8_t, max_vars>& alpha) const;

    struct Term {
        std::uint16_t lhs;
        std::uint16_t rhs;
        std::uint16_t out;
    };
    /// All (i, j, k) with alpha_i + alpha_j = alpha_k and deg(alpha_k) <= order.
    const std::vector<Term>& product_terms() const noexcept { return products_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    JetLayout(int nvars, int order);

    int nvars_;
    int order_;
    std::vector<std::array<std::uint8_t, max_vars>> exponents_;
    std::vector<int> degrees_;
    std::vector<Term> products_;
};

/// Truncated multivariate Taylor polynomial. Coefficients are stored as Taylor
/// coefficients d^alpha f / alpha!, one slot per sorted multi-index.
class Jet {
public:
    static constexpr std::size_t capacity = 35;

    Jet();
    explicit Jet(const JetLayout& layout);

    static Jet constant(const JetLayout& layout, double value);
    static Jet variable(const JetLayout& layout, int var, double value);

    const JetLayout& layout() const noexcept { return *layout_; }
    int nvars() const noexcept { return layout_->nvars(); }
    int order() const noexcept { return layout_->order(); }
    std::size_t size() const noexcept { return layout_->size(); }

    double value() const noexcept { return coeffs_[0]; }

    double coefficient(std::size_t i) const { return coeffs_[i]; }
    double& coefficient(std::size_t i) { return coeffs_[i]; }
    std::span<const double> coefficients() const { return {coeffs_.data(), size()}; }

    /// Partial derivative by a list of variable indices, e.g. {0, 0, 1} = f_xxy.
    double partial(std::initializer_list<int> vars) const;
    double partial(std::span<const int> vars) const;

    Jet& operator+=(const Jet& rhs);
    Jet& operator-=(const Jet& rhs);
    Jet& operator*=(const Jet& rhs);
    Jet& operator*=(double s);
    Jet& operator+=(double s);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a += -s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator-(Jet a)
    {
        a *= -1.0;
        return a;
    }

    friend bool operator==(const Jet& a, const Jet& b);
    friend std::ostream& operator<<(std::ostream& os, const Jet& j);

private:
    const JetLayout* layout_;
    std::array<double, capacity> coeffs_{};
};

Jet reciprocal(const Jet& f);
Jet operator/(const Jet& a, const Jet& b);
Jet ipow(const Jet& f, int n);
Jet sqrt(const Jet& f);
Jet cbrt(const Jet& f);
Jet exp(const Jet& f);
Jet sin(const Jet& f);
Jet cos(const Jet& f);

/// Real cube root that keeps the sign of its argument.
double signed_cbrt(double x) noexcept;

/// d/dx_var of a jet; the result has order one less.
Jet differentiate(const Jet& f, int var);

/// Re-expresses a jet over `layout`, mapping variable i to variable i + offset.
Jet embed(const Jet& f, const JetLayout& layout, int offset);

/// Substitutes inner[i] for variable i of `outer`. outer is a Taylor expansion
/// about the base values of the inner jets; the result lives in the inner layout.
Jet compose(const Jet& outer, std::span<const Jet> inner);

/// Local inverse of a square map x = X(s) given as jets about s0. Returns the jets
/// of s(x) about x0 = X(s0); value() of the i-th result is s0[i].
std::vector<Jet> invert_map(std::span<const Jet> map, std::span<const double> s0);

} // namespace emh
