#pragma once

#include "emh/affine.hpp"
#include "emh/normal_form.hpp"
#include "emh/linalg.hpp"
#include "emh/surface.hpp"

#include <array>
#include <cmath>
#include <random>
#include <sstream>

namespace emh::testing {

inline Vec v3(double x, double y, double z) { return Vec{{x, y, z}}; }

inline NormalFormCoefficients random_normal_form(std::mt19937& rng)
{
    std::uniform_real_distribution<double> mag(0.3, 2.0), c(-1.0, 1.0);
    NormalFormCoefficients nf;
    nf.epsilon = c(rng) < 0 ? -1 : 1;
    nf.p = -nf.epsilon * mag(rng);
    nf.a = c(rng) < 0 ? -mag(rng) : mag(rng);
    nf.b = c(rng) < 0 ? -mag(rng) : mag(rng);
    nf.a0 = c(rng), nf.a1 = c(rng), nf.a2 = c(rng), nf.a3 = c(rng);
    nf.b0 = c(rng), nf.b1 = c(rng), nf.b2 = c(rng), nf.b3 = c(rng);
    return nf;
}

inline AffineMap random_affine(std::mt19937& rng, int n)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    AffineMap phi;
    do {
        phi.linear = Mat::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) phi.linear(i, j) += d(rng);
    } while (std::abs(phi.linear.determinant()) < 0.2);
    phi.translation = Vec(n);
    for (int i = 0; i < n; ++i) phi.translation(i) = 3.0 * d(rng);
    return phi;
}

inline Surface ellipse(double ax, double ay, double cx, double cy)
{
    std::ostringstream x, y;
    x.precision(17);
    y.precision(17);
    x << cx << " + " << ax << "*cos(t)";
    y << cy << " + " << ay << "*sin(t)";
    return Surface::parametric({Expression::parse(x.str(), {"t"}), Expression::parse(y.str(), {"t"})}, {});
}


// Point of S cap plane(p0; n) at w . (psi - p0) = t, w = n x nu: plain Newton on the
// two constraints in parameter space, independent of the jet machinery.
inline Vec section_point(const Surface& s, std::span<const double> s0, const Vec& pn, double t)
{
    const SurfaceJet j0 = surface_jet(s, s0, 1);
    const Vec nu = generalized_cross(j0.tangents);
    const Eigen::Vector3d w = Eigen::Vector3d(pn).cross(Eigen::Vector3d(nu)).normalized();
    const Vec p0 = j0.position;
    std::vector<double> at(s0.begin(), s0.end());
    for (int it = 0; it < 50; ++it) {
        const SurfaceJet j = surface_jet(s, at, 1);
        const Eigen::Vector2d r(pn.dot(j.position - p0), w.dot(j.position - p0) - t);
        Eigen::Matrix2d jac;
        for (int k = 0; k < 2; ++k) jac.col(k) << pn.dot(j.tangents[k]), w.dot(j.tangents[k]);
        const Eigen::Vector2d d = jac.lu().solve(r);
        at[0] -= d(0);
        at[1] -= d(1);
        if (d.norm() < 1e-15) break;
    }
    return s.position(at);
}

// Independent reference: a random polynomial kept as (coefficient, exponents)
// terms and evaluated in extended precision.
struct Poly {
    std::vector<std::pair<double, std::array<int, 3>>> terms;
    int nvars = 2;

    long double operator()(const std::array<long double, 3>& x) const
    {
        long double s = 0;
        for (const auto& [c, e] : terms) {
            long double t = c;
            for (int v = 0; v < nvars; ++v)
                for (int k = 0; k < e[v]; ++k) t *= x[v];
            s += t;
        }
        return s;
    }

    std::string text() const
    {
        static const char* names[] = {"x", "y", "z"};
        std::ostringstream os;
        os.precision(17);
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& [c, e] = terms[i];
            os << (i ? " + " : "") << "(" << c << ")";
            for (int v = 0; v < nvars; ++v)
                if (e[v] > 0) os << "*" << names[v] << "^" << e[v];
        }
        return os.str();
    }
};

inline Poly random_poly(std::mt19937& rng, int nvars)
{
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> expo(0, 3);
    std::uniform_int_distribution<int> count(2, 6);
    Poly p;
    p.nvars = nvars;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        std::array<int, 3> e{0, 0, 0};
        for (int v = 0; v < nvars; ++v) e[v] = expo(rng);
        p.terms.push_back({coef(rng), e});
    }
    return p;
}

inline std::vector<std::string> names(int n)
{
    std::vector<std::string> all{"x", "y", "z"};
    return {all.begin(), all.begin() + n};
}

} // namespace emh::testing
