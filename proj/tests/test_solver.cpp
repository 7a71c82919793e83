#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emh/error.hpp"
#include "emh/regularity.hpp"
#include "emh/solver.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace emh;
using namespace emh::testing;

namespace {

const double origin[] = {0.0, 0.0};
constexpr double pi = std::numbers::pi;

SeedGrid square(double half, int n) { return {{{-half, half}, {-half, half}}, {n, n}}; }

Surface circle()
{
    return Surface::parametric({Expression::parse("cos(t)", {"t"}), Expression::parse("sin(t)", {"t"})}, {{-10, 10}});
}

// The rotational pair phi1 = (t cos, t sin, t^2), phi2 = ((t - t^2) cos, (t - t^2) sin, -t^2).
std::pair<Surface, Surface> rotational_pair()
{
    const std::vector<std::string> vars{"t", "th"};
    const std::vector<Interval> dom{{0.2, 0.8}, {-2 * pi, 4 * pi}};
    auto e = [&](const char* s) { return Expression::parse(s, vars); };
    return {Surface::parametric({e("t*cos(th)"), e("t*sin(th)"), e("t^2")}, dom),
            Surface::parametric({e("(t - t^2)*cos(th)"), e("(t - t^2)*sin(th)"), e("-t^2")}, dom)};
}

} // namespace

TEST_CASE("seed grid nodes are cell centers")
{
    const SeedGrid g{{{0, 1}, {-1, 1}}, {2, 4}};
    const auto nodes = g.nodes();
    REQUIRE(nodes.size() == 8);
    CHECK(nodes[0] == std::vector<double>{0.25, -0.75});
    CHECK(nodes[1] == std::vector<double>{0.25, -0.25});
    CHECK(nodes[7] == std::vector<double>{0.75, 0.75});
    CHECK(square(0.2, 5).nodes()[12] == std::vector<double>{0.0, 0.0});
}

TEST_CASE("config validation")
{
    SolverConfig cfg;
    cfg.grid1 = cfg.grid2 = square(0.2, 3);
    CHECK_NOTHROW(cfg.validate(2));
    CHECK_THROWS_AS(cfg.validate(1), Error);
    auto bad = cfg;
    bad.tolerance = 0;
    CHECK_THROWS_AS(bad.validate(2), Error);
    bad = cfg;
    bad.grid2.counts = {-1, 3};
    CHECK_THROWS_AS(bad.validate(2), Error);
    bad.grid2.counts = {0, 3}; // empty grid: valid, no seeds
    CHECK_NOTHROW(bad.validate(2));
    CHECK(bad.grid2.size() == 0);
    bad = cfg;
    bad.damping = 1.5;
    CHECK_THROWS_AS(bad.validate(2), Error);
}

TEST_CASE("refine_pair: normal-form seed converges to the origin")
{
    const auto [s1, s2] = normal_form_surfaces({});
    const double seed[] = {0.05, 0.03};
    const auto r = refine_pair(s1, origin, s2, seed, {});
    REQUIRE(r.status == SeedStatus::converged);
    CHECK(std::hypot(r.p2[0], r.p2[1]) < 1e-9);
    CHECK(r.residual < 1e-10);
    CHECK(r.iterations > 0);
}

TEST_CASE("refine_pair: parallel tangent planes are rejected")
{
    const auto s1 = Surface::graph(Expression::parse("1 + u^2 + v^2", {"u", "v"}), {});
    const auto s2 = Surface::graph(Expression::parse("-1 + u^2 + v^2", {"u", "v"}), {});
    const auto r = refine_pair(s1, origin, s2, origin, {});
    CHECK(r.status == SeedStatus::rejected_transversality);
}

TEST_CASE("refine_pair: seeds outside the domain are rejected")
{
    const auto [s1, s2] = normal_form_surfaces({});
    const double seed[] = {0.9, 0.0};
    CHECK(refine_pair(s1, origin, s2, seed, {}).status == SeedStatus::rejected_domain);
}

TEST_CASE("refine_pair: on a circle every pair is a solution")
{
    const auto c = circle();
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> t(0, 2 * pi);
    for (int i = 0; i < 20; ++i) {
        const double p1[] = {t(rng)}, seed[] = {p1[0] + 0.3 + 2.5 * std::uniform_real_distribution<double>(0, 1)(rng)};
        const auto r = refine_pair(c, p1, c, seed, {});
        REQUIRE(r.status == SeedStatus::converged);
        CHECK(r.iterations == 0);
        CHECK(r.p2[0] == seed[0]);
    }
}

TEST_CASE("sweep on the normal-form pair finds the worked example")
{
    const auto [s1, s2] = normal_form_surfaces({});
    SolverConfig cfg;
    cfg.grid1 = cfg.grid2 = square(0.2, 5);
    const auto set = sweep(s1, s2, cfg);
    CHECK(set.seeds.size() == 625);
    bool found = false;
    for (std::size_t k = 0; k < set.solutions.size(); ++k) {
        const auto& sol = set.solutions[k];
        if (std::hypot(sol.p1()[0], sol.p1()[1]) < 1e-12 && std::hypot(sol.p2()[0], sol.p2()[1]) < 1e-9) {
            found = true;
            CHECK((sol.x - v3(-1, 0, 0)).norm() < 1e-9);
            REQUIRE(sol.delta);
            CHECK(*sol.delta == doctest::Approx(432.0).epsilon(1e-4));
            REQUIRE(sol.conic);
            CHECK(sol.conic->conic_class == ConicClass::ellipse);
            CHECK(sol.conic->center_distance < 1e-8);
        }
        CHECK(max_abs(sol.residuals.solvability) < cfg.tolerance);
        CHECK(verify_solution(s1, s2, sol, cfg).ok);
    }
    CHECK(found);
    std::size_t total = 0;
    for (auto st : {SeedStatus::converged, SeedStatus::duplicate, SeedStatus::diverged,
                    SeedStatus::rejected_transversality, SeedStatus::rejected_domain, SeedStatus::rejected_degenerate})
        total += set.count(st);
    CHECK(total == set.seeds.size());
    CHECK(set.count(SeedStatus::converged) == set.solutions.size());
}

TEST_CASE("sweep is deterministic and independent of the thread count")
{
    const auto [s1, s2] = normal_form_surfaces({});
    SolverConfig cfg;
    cfg.grid1 = cfg.grid2 = square(0.3, 4);
    const auto a = sweep(s1, s2, cfg);
    cfg.threads = 3;
    const auto b = sweep(s1, s2, cfg);
    REQUIRE(a.solutions.size() == b.solutions.size());
    CHECK(a.solution_seed == b.solution_seed);
    for (std::size_t k = 0; k < a.solutions.size(); ++k) {
        CHECK(a.solutions[k].x == b.solutions[k].x);
        CHECK(a.solutions[k].p2() == b.solutions[k].p2());
    }
    for (std::size_t k = 0; k < a.seeds.size(); ++k) CHECK(a.seeds[k].result.status == b.seeds[k].result.status);
}

TEST_CASE("denser p2 seeding never loses a solution")
{
    std::mt19937 rng(32);
    const auto c = random_normal_form(rng);
    const auto [s1, s2] = normal_form_surfaces(c);
    SolverConfig coarse;
    coarse.grid1 = square(0.3, 3);
    coarse.grid2 = square(0.4, 3);
    coarse.diagnostics = false;
    SolverConfig fine = coarse;
    fine.grid2.counts = {6, 6};
    const auto a = sweep(s1, s2, coarse);
    const auto b = sweep(s1, s2, fine);
    CHECK(!a.solutions.empty());
    for (const auto& sa : a.solutions) {
        bool kept = false;
        for (const auto& sb : b.solutions) {
            double d = 0;
            for (int i = 0; i < 2; ++i)
                d += std::pow(sa.p1()[i] - sb.p1()[i], 2) + std::pow(sa.p2()[i] - sb.p2()[i], 2);
            kept = kept || std::sqrt(d) <= 2 * coarse.dedup_radius;
        }
        CHECK(kept);
    }
}

TEST_CASE("periodic parameters collapse copies of a root")
{
    const auto [s1, s2] = rotational_pair();
    SolverConfig cfg;
    cfg.grid1 = {{{0.2, 0.8}, {0, 2 * pi}}, {2, 3}};
    cfg.grid2 = {{{0.2, 0.8}, {0, 2 * pi}}, {4, 6}};
    cfg.diagnostics = false;
    const auto open = sweep(s1, s2, cfg);
    cfg.periods = {0, 2 * pi};
    const auto wrapped = sweep(s1, s2, cfg);
    CHECK(wrapped.solutions.size() <= open.solutions.size());
    for (const auto& sol : wrapped.solutions) {
        CHECK(sol.p2()[1] >= 0.0);
        CHECK(sol.p2()[1] < 2 * pi);
    }
}

TEST_CASE("rotational pair: corresponding parameters envelope in z = 0")
{
    const auto [s1, s2] = rotational_pair();
    std::mt19937 rng(33);
    std::uniform_real_distribution<double> t(0.2, 0.8), th(0, 2 * pi);
    for (int i = 0; i < 30; ++i) {
        const double p[] = {t(rng), th(rng)};
        const auto pc = build_pair(s1, p, s2, p);
        CHECK(max_abs(solvability_residual(pc)) < 1e-12);
        const auto sol = envelope_point(pc);
        CHECK(std::abs(sol.x(2)) < 1e-12);
        // Y_i is along the t-direction.
        CHECK(std::abs(pc.y1_coords(1)) < 1e-12);
        CHECK(std::abs(pc.y2_coords(1)) < 1e-12);
        for (const Surface* s : {&s1, &s2}) {
            const auto fr = blaschke_rescale(transversal_frame(surface_jet(*s, p, 2)), 2);
            CHECK(std::abs(fr.metric(0, 1)) < 1e-10);
        }
    }
}

TEST_CASE("mirror pair: corresponding points envelope in the mirror plane")
{
    std::mt19937 rng(34);
    const auto s = Surface::graph(
        Expression::parse("1 + 0.5*u^2 + 0.7*v^2 + 0.1*u*v + 0.2*u^3 - 0.1*u*v^2", {"u", "v"}), {{-1, 1}, {-1, 1}});
    const Vec n = v3(0.1, 0.2, 1), dir = v3(0.3, -0.2, 1);
    const auto rho = AffineMap::reflection(n, 0.05, dir);
    const Surface s2 = s.transformed(rho);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 20; ++i) {
        const double p[] = {u(rng), u(rng)};
        const auto pc = build_pair(s, p, s2, p);
        CHECK(max_abs(solvability_residual(pc)) < 1e-10);
        const auto sol = envelope_point(pc);
        CHECK(std::abs(n.dot(sol.x) - 0.05) / n.norm() < 1e-9);
    }
}

TEST_CASE("nonzero Delta: X is locally injective in p1")
{
    std::mt19937 rng(35);
    for (int trial = 0; trial < 5; ++trial) {
        const auto c = random_normal_form(rng);
        const auto [s1, s2] = normal_form_surfaces(c);
        const auto base = solve_pair(s1, origin, s2, origin, {});
        REQUIRE(base.smooth);
        if (!*base.smooth) continue;
        const double h = 1e-4;
        Mat jac(3, 2);
        for (int k = 0; k < 2; ++k) {
            Vec xs[2];
            for (int sgn = 0; sgn < 2; ++sgn) {
                double p1[] = {0.0, 0.0};
                p1[k] = sgn ? -h : h;
                const auto r = refine_pair(s1, p1, s2, origin, {});
                REQUIRE(r.status == SeedStatus::converged);
                xs[sgn] = envelope_point(build_pair(s1, p1, s2, r.p2)).x;
            }
            jac.col(k) = (xs[0] - xs[1]) / (2 * h);
        }
        const Eigen::JacobiSVD<Mat> svd(jac);
        CAPTURE(trial);
        CHECK(svd.singularValues()(1) > 1e-4 * svd.singularValues()(0));
    }
}
