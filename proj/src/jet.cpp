#include "emh/jet.hpp"

#include "emh/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numeric>

namespace emh {

namespace {

constexpr int max_order = 34;

using Alpha = std::array<std::uint8_t, JetLayout::max_vars>;

// Graded enumeration: all multi-indices of degree d before those of degree d + 1.
void enumerate(int nvars, int degree, int var, Alpha& current, std::vector<Alpha>& out)
{
    if (var == nvars - 1) {
        current[var] = static_cast<std::uint8_t>(degree);
        out.push_back(current);
        current[var] = 0;
        return;
    }
    for (int k = degree; k >= 0; --k) {
        current[var] = static_cast<std::uint8_t>(k);
        enumerate(nvars, degree - k, var + 1, current, out);
    }
    current[var] = 0;
}

double factorial(int n)
{
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

// Sum_k d[k] * (f - f0)^k, with d[k] the Taylor coefficients of g at f0.
Jet apply_series(const Jet& f, const std::vector<double>& d)
{
    Jet delta = f;
    delta.coefficient(0) = 0.0;
    const int k_max = std::min<int>(f.order(), static_cast<int>(d.size()) - 1);
    Jet r = Jet::constant(f.layout(), d[k_max]);
    for (int k = k_max - 1; k >= 0; --k) {
        r *= delta;
        r += d[k];
    }
    return r;
}

// Taylor coefficients of x^r about x0 > 0 up to order n.
std::vector<double> power_series(double x0, double r, int n)
{
    std::vector<double> d(n + 1);
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
        d[k] = binom * std::pow(x0, r - k);
        binom *= (r - k) / (k + 1);
    }
    return d;
}

} // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order)
{
    Alpha current{};
    if (nvars == 0) {
        exponents_.push_back(current);
    } else {
        for (int d = 0; d <= order; ++d) enumerate(nvars, d, 0, current, exponents_);
    }
    degrees_.reserve(exponents_.size());
    for (const auto& a : exponents_) degrees_.push_back(std::accumulate(a.begin(), a.end(), 0));

    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            if (degrees_[i] + degrees_[j] > order) continue;
            Alpha sum{};
            for (int v = 0; v < max_vars; ++v)
                sum[v] = static_cast<std::uint8_t>(exponents_[i][v] + exponents_[j][v]);
            products_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                                 static_cast<std::uint16_t>(index(sum))});
        }
    }
}

std::size_t JetLayout::index(const Alpha& alpha) const
{
    int deg = 0;
    for (int v = 0; v < max_vars; ++v) {
        if (v >= nvars_ && alpha[v] != 0) return npos;
        deg += alpha[v];
    }
    if (deg > order_) return npos;
    // Layouts are tiny; a linear scan starting at the first index of this degree is enough.
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        if (degrees_[i] == deg && exponents_[i] == alpha) return i;
    }
    return npos;
}

const JetLayout& JetLayout::get(int nvars, int order)
{
    struct Table {
        std::array<std::array<std::unique_ptr<JetLayout>, max_order + 1>, max_vars + 1> layouts;
        Table()
        {
            for (int n = 0; n <= max_vars; ++n) {
                for (int k = 0; k <= max_order; ++k) {
                    auto l = std::unique_ptr<JetLayout>(new JetLayout(n, k));
                    if (l->size() > Jet::capacity) break;
                    layouts[n][k] = std::move(l);
                    if (n == 0) break;
                }
            }
        }
    };
    static const Table table;
    if (nvars < 0 || nvars > max_vars || order < 0 || order > max_order)
        throw Error(ErrorKind::domain, "jet layout out of range");
    if (nvars == 0) return *table.layouts[0][0];
    const auto& l = table.layouts[nvars][order];
    if (!l)
        throw Error(ErrorKind::domain, "jet of order " + std::to_string(order) + " in " +
                                           std::to_string(nvars) + " variables exceeds capacity");
    return *l;
}

Jet::Jet() : layout_(&JetLayout::get(0, 0)) {}

Jet::Jet(const JetLayout& layout) : layout_(&layout) {}

Jet Jet::constant(const JetLayout& layout, double value)
{
    Jet j(layout);
    j.coeffs_[0] = value;
    return j;
}

Jet Jet::variable(const JetLayout& layout, int var, double value)
{
    Jet j = constant(layout, value);
    if (layout.order() >= 1) j.coeffs_[1 + var] = 1.0;
    return j;
}

double Jet::partial(std::initializer_list<int> vars) const
{
    return partial(std::span<const int>(vars.begin(), vars.size()));
}

double Jet::partial(std::span<const int> vars) const
{
    Alpha alpha{};
    for (int v : vars) {
        if (v < 0 || v >= nvars()) throw Error(ErrorKind::domain, "partial: variable index out of range");
        ++alpha[v];
    }
    const std::size_t i = layout_->index(alpha);
    if (i == JetLayout::npos) throw Error(ErrorKind::domain, "partial: derivative order exceeds jet order");
    double scale = 1.0;
    for (int v = 0; v < JetLayout::max_vars; ++v) scale *= factorial(alpha[v]);
    return coeffs_[i] * scale;
}

Jet& Jet::operator+=(const Jet& rhs)
{
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += rhs.coeffs_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& rhs)
{
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
    return *this;
}

Jet& Jet::operator*=(const Jet& rhs)
{
    *this = *this * rhs;
    return *this;
}

Jet& Jet::operator*=(double s)
{
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] *= s;
    return *this;
}

Jet& Jet::operator+=(double s)
{
    coeffs_[0] += s;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b)
{
    Jet r(a.layout());
    for (const auto& t : a.layout().product_terms()) r.coeffs_[t.out] += a.coeffs_[t.lhs] * b.coeffs_[t.rhs];
    return r;
}

bool operator==(const Jet& a, const Jet& b)
{
    if (a.layout_ != b.layout_) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.coeffs_[i] != b.coeffs_[i]) return false;
    return true;
}

std::ostream& operator<<(std::ostream& os, const Jet& j)
{
    os << "Jet[";
    for (std::size_t i = 0; i < j.size(); ++i) os << (i ? ", " : "") << j.coeffs_[i];
    return os << "]";
}

Jet reciprocal(const Jet& f)
{
    const double x0 = f.value();
    if (x0 == 0.0) throw Error(ErrorKind::domain, "division by zero");
    std::vector<double> d(f.order() + 1);
    double p = 1.0 / x0;
    for (int k = 0; k <= f.order(); ++k) {
        d[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
        p /= x0;
    }
    return apply_series(f, d);
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet ipow(const Jet& f, int n)
{
    if (n < 0) {
        if (f.value() == 0.0) throw Error(ErrorKind::domain, "negative power of zero");
        return reciprocal(ipow(f, -n));
    }
    Jet result = Jet::constant(f.layout(), 1.0);
    Jet base = f;
    while (n > 0) {
        if (n & 1) result *= base;
        n >>= 1;
        if (n > 0) base *= base;
    }
    return result;
}

Jet sqrt(const Jet& f)
{
    if (!(f.value() > 0.0)) throw Error(ErrorKind::domain, "sqrt of non-positive value");
    return apply_series(f, power_series(f.value(), 0.5, f.order()));
}

double signed_cbrt(double x) noexcept { return std::cbrt(x); }

Jet cbrt(const Jet& f)
{
    const double x0 = f.value();
    if (x0 == 0.0) throw Error(ErrorKind::domain, "cube root is not differentiable at zero");
    if (x0 > 0.0) return apply_series(f, power_series(x0, 1.0 / 3.0, f.order()));
    // cbrt(x) = -cbrt(-x) for x < 0
    auto d = power_series(-x0, 1.0 / 3.0, f.order());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] *= (k % 2 == 0) ? -1.0 : 1.0;
    return apply_series(f, d);
}

Jet exp(const Jet& f)
{
    std::vector<double> d(f.order() + 1);
    const double e = std::exp(f.value());
    for (int k = 0; k <= f.order(); ++k) d[k] = e / factorial(k);
    return apply_series(f, d);
}

Jet sin(const Jet& f)
{
    const double s = std::sin(f.value());
    const double c = std::cos(f.value());
    const double cycle[4] = {s, c, -s, -c};
    std::vector<double> d(f.order() + 1);
    for (int k = 0; k <= f.order(); ++k) d[k] = cycle[k % 4] / factorial(k);
    return apply_series(f, d);
}

Jet cos(const Jet& f)
{
    const double s = std::sin(f.value());
    const double c = std::cos(f.value());
    const double cycle[4] = {c, -s, -c, s};
    std::vector<double> d(f.order() + 1);
    for (int k = 0; k <= f.order(); ++k) d[k] = cycle[k % 4] / factorial(k);
    return apply_series(f, d);
}

Jet differentiate(const Jet& f, int var)
{
    if (f.order() == 0) throw Error(ErrorKind::domain, "cannot differentiate an order-0 jet");
    const JetLayout& out_layout = JetLayout::get(f.nvars(), f.order() - 1);
    Jet r(out_layout);
    for (std::size_t i = 0; i < out_layout.size(); ++i) {
        Alpha a = out_layout.exponents(i);
        ++a[var];
        r.coefficient(i) = f.coefficient(f.layout().index(a)) * a[var];
    }
    return r;
}

Jet embed(const Jet& f, const JetLayout& layout, int offset)
{
    if (offset + f.nvars() > layout.nvars()) throw Error(ErrorKind::domain, "embed: variable overflow");
    Jet r(layout);
    const int order = std::min(f.order(), layout.order());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.layout().degree(i) > order) continue;
        Alpha a{};
        const Alpha& src = f.layout().exponents(i);
        for (int v = 0; v < f.nvars(); ++v) a[v + offset] = src[v];
        r.coefficient(layout.index(a)) = f.coefficient(i);
    }
    return r;
}

Jet compose(const Jet& outer, std::span<const Jet> inner)
{
    if (static_cast<int>(inner.size()) != outer.nvars())
        throw Error(ErrorKind::domain, "compose: inner jet count must match outer variable count");
    if (inner.empty()) return outer;
    const JetLayout& layout = inner[0].layout();
    const int k = std::min(outer.order(), layout.order());

    std::vector<std::vector<Jet>> powers(inner.size());
    for (std::size_t v = 0; v < inner.size(); ++v) {
        Jet d = inner[v];
        d.coefficient(0) = 0.0;
        powers[v].push_back(Jet::constant(layout, 1.0));
        for (int e = 1; e <= k; ++e) powers[v].push_back(powers[v].back() * d);
    }

    Jet r(layout);
    for (std::size_t i = 0; i < outer.size(); ++i) {
        if (outer.layout().degree(i) > k) continue;
        const double c = outer.coefficient(i);
        if (c == 0.0) continue;
        const Alpha& a = outer.layout().exponents(i);
        Jet term = Jet::constant(layout, c);
        for (std::size_t v = 0; v < inner.size(); ++v)
            if (a[v] != 0) term = term * powers[v][a[v]];
        r += term;
    }
    return r;
}

std::vector<Jet> invert_map(std::span<const Jet> map, std::span<const double> s0)
{
    const int n = static_cast<int>(map.size());
    if (n == 0 || static_cast<int>(s0.size()) != n || map[0].nvars() != n)
        throw Error(ErrorKind::domain, "invert_map: map must be square");
    const JetLayout& layout = map[0].layout();
    if (layout.order() < 1) throw Error(ErrorKind::domain, "invert_map: need order >= 1");

    Eigen::MatrixXd jac(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) jac(i, j) = map[i].coefficient(1 + j);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) throw Error(ErrorKind::singular_basis, "invert_map: singular linear part");
    const Eigen::MatrixXd inv = lu.inverse();

    // Nonlinear remainder of each component.
    std::vector<Jet> nonlinear(map.begin(), map.end());
    for (auto& q : nonlinear)
        for (std::size_t i = 0; i < q.size() && q.layout().degree(i) <= 1; ++i) q.coefficient(i) = 0.0;

    std::vector<Jet> w;
    for (int j = 0; j < n; ++j) w.push_back(Jet::variable(layout, j, 0.0));

    std::vector<Jet> sigma(n, Jet(layout));
    for (int iter = 0; iter < layout.order(); ++iter) {
        std::vector<Jet> inner(n, Jet(layout));
        for (int i = 0; i < n; ++i) inner[i] = sigma[i] + s0[i];
        std::vector<Jet> rhs(n, Jet(layout));
        for (int i = 0; i < n; ++i) rhs[i] = w[i] - compose(nonlinear[i], inner);
        for (int i = 0; i < n; ++i) {
            Jet acc(layout);
            for (int j = 0; j < n; ++j) acc += rhs[j] * inv(i, j);
            sigma[i] = acc;
        }
    }
    for (int i = 0; i < n; ++i) sigma[i] += s0[i];
    return sigma;
}

} // namespace emh
