#include "emh/cli/scenarios.hpp"

#include "emh/conics.hpp"
#include "emh/error.hpp"
#include "emh/normal_form.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace emh::cli {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string num(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return "(" + os.str() + ")";
}

std::string describe(std::size_t bad, std::size_t total, const std::string& what)
{
    return std::to_string(bad) + " of " + std::to_string(total) + " " + what;
}

// Worst |g(sol)| over the solutions passing `keep`; fails when none qualify.
PropertyResult worst_over(const std::string& name, double tol, const SolutionSet& set,
                          const std::function<bool(const EnvelopeSolution&)>& keep,
                          const std::function<double(const EnvelopeSolution&)>& g, const std::string& what)
{
    PropertyResult r{name, false, 0.0, tol, ""};
    std::size_t n = 0, bad = 0;
    for (const auto& sol : set.solutions) {
        if (!keep(sol)) continue;
        ++n;
        const double v = g(sol);
        r.value = std::max(r.value, v);
        bad += !(v < tol);
    }
    r.pass = n > 0 && bad == 0;
    r.detail = n == 0 ? "no qualifying solutions" : describe(bad, n, what);
    return r;
}

bool all(const EnvelopeSolution&) { return true; }

bool same_parameters(const EnvelopeSolution& sol, const std::vector<double>& periods)
{
    const auto p1 = sol.p1(), p2 = sol.p2();
    for (std::size_t k = 0; k < p1.size(); ++k) {
        double d = p2[k] - p1[k];
        if (k < periods.size() && periods[k] > 0) d = std::remainder(d, periods[k]);
        if (std::abs(d) > 1e-6) return false;
    }
    return true;
}

Property conic_centers()
{
    return {"conic-centers", "every solution is the center of its 3+3 contact conic", 1e-6,
            [](const ScenarioInstance&, const SolutionSet& set) {
                return worst_over(
                    "conic-centers", 1e-6, set, all,
                    [](const EnvelopeSolution& s) {
                        return s.conic ? s.conic->center_distance : std::numeric_limits<double>::infinity();
                    },
                    "solutions off their conic center (or without a conic)");
            }};
}

Property oracle_agreement()
{
    return {"linear-oracle", "closed-form X agrees with the least-squares linear system", 1e-8,
            [](const ScenarioInstance&, const SolutionSet& set) {
                return worst_over(
                    "linear-oracle", 1e-8, set, all,
                    [](const EnvelopeSolution& s) {
                        return (envelope_point_linear_oracle(s.pair).x - s.x).norm() / (1.0 + s.x.norm());
                    },
                    "solutions disagreeing with the oracle");
            }};
}

ScenarioInstance normal_form_scenario(const std::map<std::string, double>& p)
{
    NormalFormCoefficients c;
    c.p = p.at("p");
    c.epsilon = static_cast<int>(p.at("epsilon"));
    c.a = p.at("a");
    c.b = p.at("b");
    c.a0 = p.at("a0"), c.a1 = p.at("a1"), c.a2 = p.at("a2"), c.a3 = p.at("a3");
    c.b0 = p.at("b0"), c.b1 = p.at("b1"), c.b2 = p.at("b2"), c.b3 = p.at("b3");
    if (!c.valid()) throw Error(ErrorKind::config, "normal-form: need epsilon = +-1 and epsilon * p < 0");
    auto [s1, s2] = normal_form_surfaces(c, p.at("half_width"));
    ScenarioInstance inst{"normal-form", std::move(s1), std::move(s2), {}, {}, {{"p", c.p}, {"epsilon", c.epsilon}}};
    const double g = p.at("grid_half_width");
    const int n = static_cast<int>(p.at("n"));
    inst.solver.grid1 = inst.solver.grid2 = {{{-g, g}, {-g, g}}, {n, n}};

    inst.properties.push_back(
        {"worked-example", "the pair at the origins is a solution with X = (p, 0, 0)", 1e-9,
         [](const ScenarioInstance& in, const SolutionSet& set) {
             PropertyResult r{"worked-example", false, std::numeric_limits<double>::infinity(), 1e-9, ""};
             const Vec want = Vec{{in.facts.at("p"), 0.0, 0.0}};
             for (const auto& s : set.solutions) {
                 const auto p1 = s.p1(), p2 = s.p2();
                 if (std::hypot(p1[0], p1[1]) < 1e-9 && std::hypot(p2[0], p2[1]) < 1e-9)
                     r.value = std::min(r.value, (s.x - want).norm());
             }
             r.pass = r.value < 1e-9;
             r.detail = std::isinf(r.value) ? "origin pair not found" : "|X - (p,0,0)| at the origin pair";
             return r;
         }});
    inst.properties.push_back(
        {"conic-class", "the conic at the origin pair is an ellipse iff epsilon = 1", 0.0,
         [](const ScenarioInstance& in, const SolutionSet& set) {
             PropertyResult r{"conic-class", false, 0.0, 0.0, "origin pair not found"};
             const auto want = in.facts.at("epsilon") > 0 ? ConicClass::ellipse : ConicClass::hyperbola;
             for (const auto& s : set.solutions) {
                 const auto p1 = s.p1(), p2 = s.p2();
                 if (std::hypot(p1[0], p1[1]) < 1e-9 && std::hypot(p2[0], p2[1]) < 1e-9 && s.conic) {
                     r.pass = s.conic->conic_class == want;
                     r.detail = std::string("class ") + to_string(s.conic->conic_class) + ", expected " + to_string(want);
                 }
             }
             return r;
         }});
    inst.properties.push_back(conic_centers());
    return inst;
}

ScenarioInstance mirror_scenario(const std::map<std::string, double>& p)
{
    std::string f = "1 + " + num(p.at("c20")) + "*u^2 + " + num(p.at("c02")) + "*v^2 + " + num(p.at("c11")) + "*u*v + " +
                    num(p.at("c30")) + "*u^3 + " + num(p.at("c21")) + "*u^2*v + " + num(p.at("c12")) + "*u*v^2 + " +
                    num(p.at("c03")) + "*v^3";
    const double h = p.at("half_width");
    Surface s1 = Surface::graph(Expression::parse(f, {"u", "v"}), {{-h, h}, {-h, h}});
    const Vec n = Vec{{p.at("nx"), p.at("ny"), p.at("nz")}};
    const Vec d = Vec{{p.at("dx"), p.at("dy"), p.at("dz")}};
    const double offset = p.at("offset");
    const AffineMap rho = AffineMap::reflection(n, offset, d);
    Surface s2 = s1.transformed(rho);
    ScenarioInstance inst{"mirror", std::move(s1), std::move(s2), {}, {}, {}};
    inst.facts = {{"nx", n(0)}, {"ny", n(1)}, {"nz", n(2)}, {"offset", offset}};
    const double g = p.at("grid_half_width");
    const int c = static_cast<int>(p.at("n"));
    inst.solver.grid1 = inst.solver.grid2 = {{{-g, g}, {-g, g}}, {c, c}};

    auto plane_distance = [](const ScenarioInstance& in) {
        const Vec nn = Vec{{in.facts.at("nx"), in.facts.at("ny"), in.facts.at("nz")}};
        const double off = in.facts.at("offset");
        return [nn, off](const EnvelopeSolution& s) { return std::abs(nn.dot(s.x) - off) / nn.norm(); };
    };
    inst.properties.push_back({"all-x-in-mirror-plane", "every envelope point lies in the fixed plane of rho", 1e-8,
                               [plane_distance](const ScenarioInstance& in, const SolutionSet& set) {
                                   return worst_over("all-x-in-mirror-plane", 1e-8, set, all, plane_distance(in),
                                                     "solutions off the mirror plane");
                               }});
    inst.properties.push_back(
        {"mirror-branch-in-plane", "pairs (p, rho p) envelope in the fixed plane of rho", 1e-8,
         [plane_distance](const ScenarioInstance& in, const SolutionSet& set) {
             return worst_over(
                 "mirror-branch-in-plane", 1e-8, set,
                 [](const EnvelopeSolution& s) { return same_parameters(s, {}); }, plane_distance(in),
                 "pairs (p, rho p) off the mirror plane");
         }});
    inst.properties.push_back(
        {"mirror-branch-reflection-pattern", "normal form of (p, rho p) has b = -a, b_i = -a_i, delta = 1", 1e-6,
         [](const ScenarioInstance&, const SolutionSet& set) {
             return worst_over(
                 "mirror-branch-reflection-pattern", 1e-6, set,
                 [](const EnvelopeSolution& s) { return same_parameters(s, {}); }, reflection_defect,
                 "pairs (p, rho p) breaking the reflection pattern");
         }});
    inst.properties.push_back(conic_centers());
    return inst;
}

ScenarioInstance counterexample_scenario(const std::map<std::string, double>& p)
{
    const std::string f = num(p.at("f2")) + "*t^2 + " + num(p.at("f3")) + "*t^3 + " + num(p.at("f4")) + "*t^4";
    const std::string r2 = "(t - " + num(p.at("lambda")) + "*(" + f + "))";
    const std::vector<std::string> vars{"t", "th"};
    const double t0 = p.at("t_min"), t1 = p.at("t_max");
    if (!(t1 > t0)) throw Error(ErrorKind::config, "counterexample: need t_min < t_max");
    const std::vector<Interval> dom{{t0, t1}, {-two_pi, 2 * two_pi}};
    auto e = [&](const std::string& s) { return Expression::parse(s, vars); };
    Surface s1 = Surface::parametric({e("t*cos(th)"), e("t*sin(th)"), e(f)}, dom);
    Surface s2 = Surface::parametric({e(r2 + "*cos(th)"), e(r2 + "*sin(th)"), e("-(" + f + ")")}, dom);
    ScenarioInstance inst{"counterexample", std::move(s1), std::move(s2), {}, {}, {}};
    const int nt = static_cast<int>(p.at("n_t")), nth = static_cast<int>(p.at("n_theta"));
    inst.solver.grid1 = inst.solver.grid2 = {{{t0, t1}, {0.0, two_pi}}, {nt, nth}};
    inst.solver.periods = {0.0, two_pi};

    inst.properties.push_back(
        {"h-orthogonality", "|h_B(psi_t, psi_theta)| on both surfaces at every p1 grid node", 1e-10,
         [](const ScenarioInstance& in, const SolutionSet&) {
             PropertyResult r{"h-orthogonality", true, 0.0, 1e-10, ""};
             const auto nodes = in.solver.grid1.nodes();
             for (const auto& q : nodes)
                 for (const Surface* s : {&in.s1, &in.s2}) r.value = std::max(r.value, blaschke_cross_term(*s, q));
             r.pass = r.value < 1e-10;
             r.detail = std::to_string(2 * nodes.size()) + " points sampled";
             return r;
         }});
    inst.properties.push_back({"emh-in-plane-z0", "every envelope point has |z| < tol", 1e-8,
                               [](const ScenarioInstance&, const SolutionSet& set) {
                                   return worst_over(
                                       "emh-in-plane-z0", 1e-8, set, all,
                                       [](const EnvelopeSolution& s) { return std::abs(s.x(2)); },
                                       "solutions off z = 0");
                               }});
    inst.properties.push_back(
        {"corresponding-branch-in-plane-z0", "pairs (phi1(t, th), phi2(t, th)) envelope in z = 0", 1e-8,
         [](const ScenarioInstance& in, const SolutionSet& set) {
             const auto periods = in.solver.periods;
             return worst_over(
                 "corresponding-branch-in-plane-z0", 1e-8, set,
                 [periods](const EnvelopeSolution& s) { return same_parameters(s, periods); },
                 [](const EnvelopeSolution& s) { return std::abs(s.x(2)); }, "corresponding pairs off z = 0");
         }});
    // Evidence, not proof: a local reflection would force the mirror-pair pattern.
    inst.properties.push_back(
        {"no-reflection-evidence", "normal form at corresponding pairs breaks the reflection pattern", 1e-6,
         [](const ScenarioInstance& in, const SolutionSet& set) {
             PropertyResult r{"no-reflection-evidence", false, std::numeric_limits<double>::infinity(), 1e-6, ""};
             std::size_t n = 0;
             for (const auto& s : set.solutions) {
                 if (!same_parameters(s, in.solver.periods)) continue;
                 ++n;
                 r.value = std::min(r.value, reflection_defect(s));
             }
             r.pass = n > 0 && r.value > 1e-6;
             r.detail = "smallest reflection defect over " + std::to_string(n) + " corresponding pairs (evidence)";
             return r;
         }});
    inst.properties.push_back(conic_centers());
    return inst;
}

ScenarioInstance conic_curve_scenario(const std::map<std::string, double>& p)
{
    const double ax = p.at("ax"), ay = p.at("ay"), cx = p.at("cx"), cy = p.at("cy");
    if (!(ax > 0 && ay > 0)) throw Error(ErrorKind::config, "conic-curve: semi-axes must be positive");
    const std::vector<std::string> vars{"t"};
    Surface s = Surface::parametric({Expression::parse(num(cx) + " + " + num(ax) + "*cos(t)", vars),
                                     Expression::parse(num(cy) + " + " + num(ay) + "*sin(t)", vars)},
                                    {{-two_pi, 2 * two_pi}});
    ScenarioInstance inst{"conic-curve", s, s, {}, {}, {{"cx", cx}, {"cy", cy}}};
    const int n = static_cast<int>(p.at("n"));
    inst.solver.grid1 = inst.solver.grid2 = {{{0.0, two_pi}}, {n}};
    inst.solver.periods = {two_pi};
    inst.properties.push_back({"emh-is-center", "every envelope point is the center of the conic", 1e-8,
                               [](const ScenarioInstance& in, const SolutionSet& set) {
                                   const Vec c = Vec{{in.facts.at("cx"), in.facts.at("cy")}};
                                   return worst_over(
                                       "emh-is-center", 1e-8, set, all,
                                       [c](const EnvelopeSolution& s) { return (s.x - c).norm(); },
                                       "solutions away from the center");
                               }});
    inst.properties.push_back(oracle_agreement());
    return inst;
}

ScenarioInstance generic_scenario(const std::map<std::string, double>& p)
{
    const double e = p.at("perturbation");
    const std::vector<std::string> vars{"u", "v"};
    const std::string f1 = "1 - u - u^2 + v^2 + " + num(e) + "*(0.3*u*v + 0.5*u^3 - 0.4*u^2*v + 0.2*v^3 + 0.6*u^4 - 0.3*u*v^3)";
    const std::string f2 = "-1 + u + u^2 + v^2 + " + num(e) + "*(-0.2*u*v + 0.1*u^3 + 0.7*u*v^2 - 0.5*v^4 + 0.4*u^2*v^2)";
    Surface n1 = Surface::graph(Expression::parse(f1, vars), {{-0.6, 0.6}, {-0.6, 0.6}});
    Surface n2 = Surface::graph(Expression::parse(f2, vars), {{-0.6, 0.6}, {-0.6, 0.6}});
    AffineMap phi;
    phi.linear = Mat(3, 3);
    phi.linear << 1.2, 0.3, -0.1, 0.2, 0.9, 0.25, -0.15, 0.1, 1.1;
    phi.translation = Vec{{0.5, -0.25, 0.75}};
    ScenarioInstance inst{"generic", n1.transformed(phi), n2.transformed(phi), {}, {}, {}};
    const int n = static_cast<int>(p.at("n"));
    inst.solver.grid1 = {{{-0.3, 0.3}, {-0.3, 0.3}}, {n, n}};
    inst.solver.grid2 = {{{-0.3, 0.3}, {-0.3, 0.3}}, {n, n}};
    inst.properties.push_back(conic_centers());
    inst.properties.push_back(oracle_agreement());
    inst.properties.push_back(
        {"re-verification", "every solution re-verifies from the surfaces", 1e-6,
         [](const ScenarioInstance& in, const SolutionSet& set) {
             return worst_over(
                 "re-verification", 1e-6, set, all,
                 [&in](const EnvelopeSolution& s) {
                     const auto chk = verify_solution(in.s1, in.s2, s, in.solver);
                     return chk.ok ? std::max(chk.plane, chk.derivatives) : std::numeric_limits<double>::infinity();
                 },
                 "solutions failing re-verification");
         }});
    return inst;
}

std::vector<Scenario> build_library()
{
    std::vector<Scenario> lib;
    lib.push_back({"normal-form", "pair of graphs in the affine normal form; the origin pair envelopes at (p, 0, 0)",
                   {{"p", -1}, {"epsilon", 1}, {"a", 1}, {"b", 1}, {"a0", 0}, {"a1", 0}, {"a2", 0}, {"a3", 0},
                    {"b0", 0}, {"b1", 0}, {"b2", 0}, {"b3", 0}, {"half_width", 0.5}, {"grid_half_width", 0.2}, {"n", 5}},
                   normal_form_scenario});
    lib.push_back({"mirror", "convex graph patch S and its affine reflection rho(S)",
                   {{"c20", 0.5}, {"c02", 0.7}, {"c11", 0.1}, {"c30", 0.2}, {"c21", 0}, {"c12", -0.1}, {"c03", 0.15},
                    {"nx", 0.1}, {"ny", 0.2}, {"nz", 1}, {"offset", 0.05}, {"dx", 0.3}, {"dy", -0.2}, {"dz", 1},
                    {"half_width", 0.6}, {"grid_half_width", 0.5}, {"n", 6}},
                   mirror_scenario});
    lib.push_back({"counterexample",
                   "rotational surfaces of a convex profile f and its affine reflection (t - lambda f, -f)",
                   {{"lambda", 1}, {"f2", 1}, {"f3", 0}, {"f4", 0}, {"t_min", 0.2}, {"t_max", 0.48}, {"n_t", 8},
                    {"n_theta", 8}},
                   counterexample_scenario});
    lib.push_back({"conic-curve", "a central conic paired with itself (N = 1); every pair envelopes at the center",
                   {{"ax", 1}, {"ay", 1}, {"cx", 0}, {"cy", 0}, {"n", 12}}, conic_curve_scenario});
    lib.push_back({"generic", "perturbed normal-form pair under a fixed affine map; no expected symmetry",
                   {{"perturbation", 1}, {"n", 4}}, generic_scenario});
    return lib;
}

} // namespace

ScenarioInstance Scenario::instantiate(const std::map<std::string, double>& overrides) const
{
    auto params = defaults;
    for (const auto& [k, v] : overrides) {
        if (!params.count(k)) throw Error(ErrorKind::config, "scenario '" + name + "' has no parameter '" + k + "'");
        params[k] = v;
    }
    for (const char* key : {"n", "n_t", "n_theta"})
        if (params.count(key) && !(params[key] >= 1 && params[key] == std::floor(params[key])))
            throw Error(ErrorKind::config, std::string("scenario parameter '") + key + "' must be a positive integer");
    try {
        return make(params);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        throw Error(ErrorKind::config, "scenario '" + name + "': " + e.what());
    }
}

const std::vector<Scenario>& scenario_library()
{
    static const std::vector<Scenario> lib = build_library();
    return lib;
}

const Scenario& find_scenario(const std::string& name)
{
    for (const auto& s : scenario_library())
        if (s.name == name) return s;
    std::string known;
    for (const auto& s : scenario_library()) known += (known.empty() ? "" : ", ") + s.name;
    throw Error(ErrorKind::config, "unknown scenario '" + name + "' (known: " + known + ")");
}

std::vector<PropertyResult> check_properties(const ScenarioInstance& inst, const SolutionSet& set)
{
    std::vector<PropertyResult> out;
    for (const auto& p : inst.properties) {
        try {
            out.push_back(p.check(inst, set));
        } catch (const Error& e) {
            out.push_back({p.name, false, std::numeric_limits<double>::infinity(), p.tolerance, e.what()});
        }
    }
    return out;
}

double blaschke_cross_term(const Surface& s, std::span<const double> params)
{
    if (s.dim() < 2) return 0.0;
    const auto fr = blaschke_rescale(transversal_frame(surface_jet(s, params, 2)), s.dim());
    return std::abs(fr.metric(0, 1));
}

double reflection_defect(const EnvelopeSolution& sol)
{
    const auto c = normal_form(sol).coefficients;
    const double scale = 1.0 + std::abs(c.a) + std::abs(c.b) + std::abs(c.a0) + std::abs(c.a1) + std::abs(c.a2) +
                         std::abs(c.a3) + std::abs(c.b0) + std::abs(c.b1) + std::abs(c.b2) + std::abs(c.b3);
    const double d = std::max({std::abs(c.a + c.b), std::abs(c.a0 + c.b0), std::abs(c.a1 + c.b1),
                               std::abs(c.a2 + c.b2), std::abs(c.a3 + c.b3)}) /
                     scale;
    return std::max(d, std::abs(c.delta - 1.0));
}

} // namespace emh::cli
