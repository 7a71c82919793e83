#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emh/conics.hpp"
#include "emh/error.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace emh;
using namespace emh::testing;

namespace {

const double origin[] = {0.0, 0.0};

PairOptions order3()
{
    PairOptions o;
    o.jet_order = 3;
    return o;
}

EnvelopeSolution solve_at_origin(const Surface& s1, const Surface& s2)
{
    return envelope_point(build_pair(s1, origin, s2, origin, order3()));
}

double max_diff(const std::array<double, 6>& a, const std::array<double, 6>& b)
{
    double m = 0.0;
    for (int i = 0; i < 6; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Conic of the normal-form pair in the (x, z) frame at the origin:
// e (x - p)^2 + z^2 = e p^2 + 1.
std::array<double, 6> expected_conic(double p, int e)
{
    return normalize_conic({double(e), 0.0, 1.0, -2.0 * e * p, 0.0, -1.0});
}

} // namespace

TEST_CASE("normal form of the normal-form pair is the identity")
{
    const auto [s1, s2] = normal_form_surfaces({});
    const auto nf = normal_form(solve_at_origin(s1, s2));
    CHECK((nf.map.linear - Mat::Identity(3, 3)).norm() < 1e-10);
    CHECK(nf.map.translation.norm() < 1e-10);
    const auto& c = nf.coefficients;
    CHECK(c.p == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c.epsilon == 1);
    CHECK(c.a == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c.b == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c.delta == doctest::Approx(1.0).epsilon(1e-10));
    for (double t : {c.a0, c.a1, c.a2, c.a3, c.b0, c.b1, c.b2, c.b3}) CHECK(std::abs(t) < 1e-10);
    CHECK((nf.x_image - v3(-1, 0, 0)).norm() < 1e-10);
    CHECK(nf.epsilon_mismatch < 1e-12);
}

TEST_CASE("normal form recovers random coefficients")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto in = random_normal_form(rng);
        const auto [s1, s2] = normal_form_surfaces(in);
        const auto nf = normal_form(solve_at_origin(s1, s2));
        const auto& c = nf.coefficients;
        CAPTURE(trial);
        CHECK(c.epsilon == in.epsilon);
        CHECK(std::abs(c.p - in.p) < 1e-9);
        CHECK(std::abs(c.delta - 1.0) < 1e-9);
        CHECK(std::abs(c.a - in.a) < 1e-9);
        CHECK(std::abs(c.b - in.b) < 1e-9);
        const double got[] = {c.a0, c.a1, c.a2, c.a3, c.b0, c.b1, c.b2, c.b3};
        const double want[] = {in.a0, in.a1, in.a2, in.a3, in.b0, in.b1, in.b2, in.b3};
        for (int i = 0; i < 8; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-8);
        CHECK(std::abs(nf.mixed1.at(0)) < 1e-10);
        CHECK(std::abs(nf.mixed2.at(0)) < 1e-10);
    }
}

TEST_CASE("normal form under affine maps")
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto in = random_normal_form(rng);
        const auto phi = random_affine(rng, 3);
        const auto [n1, n2] = normal_form_surfaces(in);
        const Surface s1 = n1.transformed(phi), s2 = n2.transformed(phi);
        const auto sol = solve_at_origin(s1, s2);
        const auto nf = normal_form(sol);
        const auto& c = nf.coefficients;
        CAPTURE(trial);
        CHECK((sol.x - phi.apply(v3(in.p, 0, 0))).norm() < 1e-9);
        CHECK(c.epsilon == in.epsilon);
        CHECK(std::abs(c.p - in.p) < 1e-8);
        CHECK(std::abs(c.delta - 1.0) < 1e-8);
        CHECK(std::abs(c.a0 - in.a0) < 1e-8);
        CHECK(std::abs(c.b0 - in.b0) < 1e-8);
        // The y-axis is rescaled to a unit vector, so only ratios survive in v.
        CHECK(std::abs(c.a / c.b - in.a / in.b) < 1e-8 * (1 + std::abs(in.a / in.b)));
        CHECK(std::abs(nf.mixed1.at(0)) < 1e-10);
        CHECK(std::abs(nf.mixed2.at(0)) < 1e-10);
        CHECK((nf.map.apply(sol.pair.j1.position) - v3(0, 0, 1)).norm() < 1e-9);
        CHECK((nf.map.apply(sol.pair.j2.position) - v3(0, 0, -1)).norm() < 1e-9);
        CHECK((nf.x_image - v3(in.p, 0, 0)).norm() < 1e-9);
    }
}

TEST_CASE("normal-form polynomial reproduces the transformed surface")
{
    // The normal-form surfaces are cubic graphs, so points of S1 mapped back into
    // normal-form coordinates lie exactly on w = f1(u, v).
    std::mt19937 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto in = random_normal_form(rng);
        const auto phi = random_affine(rng, 3);
        const auto [n1, n2] = normal_form_surfaces(in);
        const Surface s1 = n1.transformed(phi), s2 = n2.transformed(phi);
        const auto nf = normal_form(solve_at_origin(s1, s2));
        const auto& c = nf.coefficients;
        auto f1 = [&](double u, double v) {
            const int e = c.epsilon;
            return 1 + e * c.p * u - 0.5 * (c.p * c.p + e) * u * u + c.a * v * v + c.a0 * u * u * u +
                   c.a1 * u * u * v + c.a2 * u * v * v + c.a3 * v * v * v;
        };
        auto gap = [&](double h) {
            const double at[] = {0.6 * h, -0.8 * h};
            const Vec q = nf.map.apply(s1.position(at));
            return std::abs(q(2) - f1(q(0), q(1)));
        };
        CAPTURE(trial);
        for (double h : {0.3, 0.1, 1e-2}) CHECK(gap(h) < 1e-10);
    }
}

TEST_CASE("planar section of a graph")
{
    const auto s = Surface::graph(Expression::parse("1 - u - u^2 + v^2 + u*v^2", {"u", "v"}), {});
    const Plane2 plane{v3(0, 0, 1), v3(1, 0, 0), v3(0, 0, 1)};
    const auto sec = planar_section_jet(s, origin, plane, 4);
    REQUIRE(sec.size() == 3);
    const Jet& x = sec[0];
    const Jet expected = 1.0 - x - x * x;
    for (int k = 0; k <= 4; ++k) {
        CHECK(std::abs(sec[1].coefficient(k)) < 1e-14);
        CHECK(std::abs(sec[2].coefficient(k) - expected.coefficient(k)) < 1e-12);
    }
    CHECK(std::abs(x.coefficient(0)) < 1e-15);
    // t is the coordinate along the unit section tangent.
    const double dx = x.coefficient(1), dz = sec[2].coefficient(1);
    CHECK(std::hypot(dx, dz) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("planar section of a paraboloid has unit curvature at the pole")
{
    const auto s = Surface::graph(Expression::parse("1 - (u^2 + v^2)/2", {"u", "v"}), {});
    const double c = std::cos(0.7), sn = std::sin(0.7);
    const Plane2 plane{v3(0, 0, 1), v3(c, sn, 0), v3(0, 0, 1)};
    const auto sec = planar_section_jet(s, origin, plane, 3);
    Eigen::Vector2d d1, d2;
    for (int k = 0; k < 2; ++k) {
        const Jet coord = k == 0 ? sec[0] * c + sec[1] * sn : sec[2];
        d1(k) = coord.coefficient(1);
        d2(k) = 2.0 * coord.coefficient(2);
    }
    const double kappa = std::abs(d1(0) * d2(1) - d1(1) * d2(0)) / std::pow(d1.norm(), 3);
    CHECK(kappa == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("planar section rejects the tangent plane")
{
    const auto s = Surface::graph(Expression::parse("1 - (u^2 + v^2)/2", {"u", "v"}), {});
    const Plane2 plane{v3(0, 0, 1), v3(1, 0, 0), v3(0, 1, 0)};
    CHECK_THROWS_AS(planar_section_jet(s, origin, plane, 2), Error);
}

TEST_CASE("contact conic of the normal-form pair")
{
    const auto [s1, s2] = normal_form_surfaces({});
    const auto sol = solve_at_origin(s1, s2);
    const auto rep = contact_conic(sol);
    CHECK(rep.null_dim == 1);
    CHECK(std::abs(rep.contact_det) < 1e-12);
    // (x + 1)^2 + z^2 = 2
    const auto q = rep.conic.in_frame(v3(0, 0, 0), v3(1, 0, 0), v3(0, 0, 1));
    CHECK(max_diff(q, normalize_conic({1, 0, 1, 2, 0, -1})) < 1e-8);
    REQUIRE(rep.conic.center);
    CHECK((*rep.conic.center - v3(-1, 0, 0)).norm() < 1e-8);
    CHECK(rep.center_distance < 1e-8);
    CHECK(rep.conic.conic_class == ConicClass::ellipse);
    // Along z = 1 - x - x^2 the circle has contact exactly 3.
    CHECK(std::abs(rep.third1) > 1e-3);
    CHECK(std::abs(rep.third2) > 1e-3);
}

TEST_CASE("contact conic of random normal forms")
{
    std::mt19937 rng(14);
    int ellipses = 0, hyperbolas = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto in = random_normal_form(rng);
        if (std::abs(std::abs(in.p) - 1.0) < 0.05) continue; // e p^2 + 1 = 0 degenerates the hyperbola
        const auto [n1, n2] = normal_form_surfaces(in);
        const auto rep = contact_conic(solve_at_origin(n1, n2));
        CAPTURE(trial);
        const auto q = rep.conic.in_frame(v3(0, 0, 0), v3(1, 0, 0), v3(0, 0, 1));
        CHECK(max_diff(q, expected_conic(in.p, in.epsilon)) < 1e-8);
        CHECK(rep.center_distance < 1e-8);
        const auto want = in.epsilon == 1 ? ConicClass::ellipse : ConicClass::hyperbola;
        CHECK(rep.conic.conic_class == want);
        (want == ConicClass::ellipse ? ellipses : hyperbolas)++;
    }
    CHECK(ellipses > 5);
    CHECK(hyperbolas > 5);
}

TEST_CASE("contact conic is affinely equivariant and has contact order 3")
{
    std::mt19937 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        auto in = random_normal_form(rng);
        if (std::abs(std::abs(in.p) - 1.0) < 0.05) continue;
        const auto phi = random_affine(rng, 3);
        const auto [n1, n2] = normal_form_surfaces(in);
        const Surface s1 = n1.transformed(phi), s2 = n2.transformed(phi);
        const auto sol = solve_at_origin(s1, s2);
        const auto rep = contact_conic(sol);
        CAPTURE(trial);
        CHECK(rep.null_dim == 1);
        CHECK(rep.center_distance < 1e-8 * (1 + sol.x.norm()));
        CHECK(rep.conic.conic_class == (in.epsilon == 1 ? ConicClass::ellipse : ConicClass::hyperbola));

        // q on true section points decays like t^3.
        const Vec pn = Eigen::Vector3d(rep.conic.plane.e1).cross(Eigen::Vector3d(rep.conic.plane.e2));
        for (const Surface* s : {&s1, &s2}) {
            auto qt = [&](double t) { return std::abs(rep.conic.evaluate(section_point(*s, origin, pn, t))); };
            const double slope = std::log(qt(4e-3) / qt(2e-3)) / std::log(2.0);
            CHECK(slope >= 2.9);
        }
    }
}

TEST_CASE("contact determinant vanishes at the solution and not nearby")
{
    const auto [s1, s2] = normal_form_surfaces({});
    auto det_at = [&](double tau) {
        const double p2[] = {tau, 0.0};
        return contact_system(build_pair(s1, origin, s2, p2, order3())).matrix.determinant();
    };
    const double d0 = det_at(0.0);
    CHECK(std::abs(d0) < 1e-12);
    for (double tau : {-0.1, -0.05, 0.05, 0.1}) {
        CAPTURE(tau);
        CHECK(std::abs(det_at(tau)) > 1e3 * std::abs(d0));
    }
    CHECK(det_at(-0.05) * det_at(0.05) < 0.0);
}

TEST_CASE("contact conic rejects a non-solvable pair")
{
    const auto [s1, s2] = normal_form_surfaces({});
    const double p2[] = {0.1, 0.0};
    EnvelopeSolution sol;
    sol.pair = build_pair(s1, origin, s2, p2, order3());
    sol.x = v3(-1, 0, 0);
    try {
        contact_conic(sol);
        FAIL("expected a null-space error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::null_space);
        CHECK(std::string(e.what()).find("dimension 0") != std::string::npos);
    }
}
