#include "emh/cli/commands.hpp"

#include "emh/conics.hpp"
#include "emh/error.hpp"
#include "emh/normal_form.hpp"
#include "emh/regularity.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace emh::cli {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
        out.push_back(row);
    }
    return out;
}

json solver_json(const SolverConfig& c)
{
    auto grid = [](const SeedGrid& g) {
        json box = json::array();
        for (const auto& iv : g.box) box.push_back({iv.lo, iv.hi});
        return json{{"box", box}, {"counts", g.counts}};
    };
    return {{"tolerance", c.tolerance},     {"max_iterations", c.max_iterations},
            {"damping", c.damping},         {"max_halvings", c.max_halvings},
            {"transversality_min", c.transversality_min},
            {"dedup_radius", c.dedup_radius}, {"grid1", grid(c.grid1)},
            {"grid2", grid(c.grid2)},        {"periods", c.periods},
            {"threads", c.threads},          {"jet_order", c.jet_order}};
}

json run_report(const SolveOutcome& o)
{
    const auto& set = o.set;
    json status;
    for (auto s : {SeedStatus::converged, SeedStatus::duplicate, SeedStatus::diverged, SeedStatus::rejected_transversality,
                   SeedStatus::rejected_domain, SeedStatus::rejected_degenerate})
        status[to_string(s)] = set.count(s);
    double iters = 0.0, max_res = 0.0;
    int max_iters = 0;
    std::size_t conv = 0, smooth = 0, with_delta = 0;
    for (const auto& r : set.seeds) {
        if (r.result.status != SeedStatus::converged && r.result.status != SeedStatus::duplicate) continue;
        ++conv;
        iters += r.result.iterations;
        max_iters = std::max(max_iters, r.result.iterations);
        max_res = std::max(max_res, r.result.residual);
    }
    std::map<std::string, int> classes = {{"ellipse", 0}, {"hyperbola", 0}, {"degenerate", 0}, {"none", 0}};
    for (const auto& s : set.solutions) {
        ++classes[s.conic ? to_string(s.conic->conic_class) : "none"];
        if (s.delta) ++with_delta;
        if (s.smooth && *s.smooth) ++smooth;
    }
    json props = json::array();
    for (const auto& p : o.properties)
        props.push_back({{"name", p.name}, {"pass", p.pass}, {"value", p.value}, {"tolerance", p.tolerance}, {"detail", p.detail}});
    return {{"scenario", o.instance.name},
            {"seeds", set.seeds.size()},
            {"status", status},
            {"solutions", set.solutions.size()},
            {"newton", {{"mean_iterations", conv ? iters / static_cast<double>(conv) : 0.0},
                        {"max_iterations", max_iters},
                        {"max_residual", max_res}}},
            {"conic_classes", classes},
            {"regularity", {{"with_delta", with_delta}, {"smooth", smooth}}},
            {"properties", props},
            {"solver", solver_json(o.instance.solver)},
            {"seconds", o.seconds}};
}

EnvelopeSolution diagnose(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2)
{
    SolverConfig cfg = inst.solver;
    cfg.jet_order = std::max(cfg.jet_order, 3);
    cfg.diagnostics = true;
    return solve_pair(inst.s1, p1, inst.s2, p2, cfg);
}

json pair_json(const EnvelopeSolution& sol)
{
    return {{"p1", sol.p1()}, {"p2", sol.p2()}, {"x", vec_json(sol.x)}, {"lambda", sol.pair.lambda},
            {"residual", sol.residuals.max()}};
}

} // namespace

ScenarioInstance resolve(const RunConfig& cfg)
{
    ScenarioInstance inst = cfg.scenario
                                ? find_scenario(*cfg.scenario).instantiate(cfg.parameters)
                                : ScenarioInstance{"custom", cfg.surfaces.at(0), cfg.surfaces.at(1), {}, {}, {}};
    if (cfg.solver_overlay) inst.solver = cfg.solver_overlay(inst.solver);
    const int n = inst.s1.dim();
    auto fill = [&](SeedGrid& g, const Surface& s) {
        if (!g.box.empty()) return;
        if (static_cast<int>(s.domain().size()) != n)
            throw Error(ErrorKind::config, "solver: no seed grid box given and the surface has no domain");
        g.box = s.domain();
        if (g.counts.empty()) g.counts.assign(static_cast<std::size_t>(n), 6);
    };
    fill(inst.solver.grid1, inst.s1);
    fill(inst.solver.grid2, inst.s2);
    inst.solver.validate(n);
    return inst;
}

void apply_overrides(RunConfig& cfg, const Overrides& o)
{
    if (!o.tolerance && !o.max_iterations && !o.grid) return;
    std::optional<std::pair<std::vector<int>, std::vector<int>>> counts;
    if (o.grid) counts = parse_grid_spec(*o.grid);
    auto inner = cfg.solver_overlay;
    cfg.solver_overlay = [inner, o, counts](const SolverConfig& base) {
        SolverConfig s = inner ? inner(base) : base;
        if (o.tolerance) s.tolerance = *o.tolerance;
        if (o.max_iterations) s.max_iterations = *o.max_iterations;
        if (counts) {
            s.grid1.counts = counts->first;
            s.grid2.counts = counts->second;
        }
        return s;
    };
}

SolveOutcome solve(const RunConfig& cfg, bool check_scenario_properties)
{
    SolveOutcome o{resolve(cfg), {}, {}, {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    o.set = sweep(o.instance.s1, o.instance.s2, o.instance.solver);
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (check_scenario_properties) o.properties = check_properties(o.instance, o.set);
    o.report = run_report(o);
    o.report["source"] = cfg.source;
    return o;
}

std::string render(const SolveOutcome& o, const std::string& format)
{
    if (format == "csv") return to_csv(csv_rows(o.set));
    if (format == "obj") return to_obj(o.set);
    if (format == "json") return o.report.dump(2) + "\n";
    throw Error(ErrorKind::config, "unknown format '" + format + "' (csv, obj or json)");
}

void write_outputs(const SolveOutcome& o, const OutputSpec& out)
{
    if (!out.csv.empty()) write_file_atomic(out.csv, render(o, "csv"));
    if (!out.obj.empty()) write_file_atomic(out.obj, render(o, "obj"));
    if (!out.json.empty()) write_file_atomic(out.json, render(o, "json"));
}

int run_solve(const RunConfig& cfg, std::ostream& log, std::ostream* out, const std::string& format)
{
    const auto o = solve(cfg, cfg.scenario.has_value());
    write_outputs(o, cfg.outputs);
    if (out) *out << render(o, format);
    log << o.instance.name << ": " << o.set.seeds.size() << " seeds, " << o.set.solutions.size() << " solutions, "
        << o.seconds << " s\n";
    for (const auto& p : o.properties)
        log << "  " << (p.pass ? "PASS " : "FAIL ") << p.name << " = " << format_number(p.value) << " (tol "
            << p.tolerance << "; " << p.detail << ")\n";
    return o.set.solutions.empty() ? exit_no_solutions : exit_ok;
}

VerifyReport verify_rows(const ScenarioInstance& inst, const std::vector<CsvRow>& rows)
{
    VerifyReport rep;
    rep.rows = rows.size();
    SolverConfig cfg = inst.solver;
    cfg.diagnostics = true;
    const std::size_t n = static_cast<std::size_t>(inst.s1.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::string why;
        try {
            if (r.p1.size() != n || r.p2.size() != n) throw Error(ErrorKind::io, "parameter count does not match the surfaces");
            const auto sol = solve_pair(inst.s1, r.p1, inst.s2, r.p2, cfg);
            const auto chk = verify_solution(inst.s1, inst.s2, sol, cfg);
            rep.max_solvability = std::max(rep.max_solvability, chk.solvability);
            rep.max_plane = std::max(rep.max_plane, chk.plane);
            rep.max_derivative = std::max(rep.max_derivative, chk.derivatives);
            const double dx = r.x.size() == sol.x.size() ? (r.x - sol.x).norm() / (1.0 + sol.x.norm())
                                                         : std::numeric_limits<double>::infinity();
            rep.max_x_deviation = std::max(rep.max_x_deviation, dx);
            if (!chk.ok) why = "residuals fail re-verification";
            else if (!(dx < 1e-8)) why = "X deviates from the recomputed envelope point by " + format_number(dx);
            else if (!(std::abs(r.lambda - sol.pair.lambda) <= 1e-8 * (1.0 + std::abs(sol.pair.lambda))))
                why = "lambda deviates";
            if (why.empty() && r.conic_class) {
                if (!sol.conic) why = "contact conic could not be rebuilt";
                else {
                    rep.max_center_distance = std::max(rep.max_center_distance, sol.conic->center_distance);
                    if (sol.conic->conic_class != *r.conic_class) why = "conic class differs";
                    else if (!(sol.conic->center_distance < 1e-6))
                        why = "conic center is " + format_number(sol.conic->center_distance) + " from X";
                }
            }
            if (why.empty() && r.delta) {
                if (!sol.delta) why = "Delta could not be recomputed";
                else {
                    const auto d = delta(inst.s1, inst.s2, sol);
                    const double scale = std::pow(d.jg1.norm(), static_cast<double>(d.jg1.rows()));
                    const double dev = std::abs(*r.delta - d.delta) / std::max(scale, 1e-300);
                    rep.max_delta_deviation = std::max(rep.max_delta_deviation, dev);
                    if (!(dev < 1e-6)) why = "Delta deviates by " + format_number(dev) + " relative";
                    else if (r.smooth && *r.smooth != d.smooth) why = "smooth flag differs";
                }
            }
        } catch (const Error& e) {
            why = e.what();
        }
        if (!why.empty()) {
            ++rep.failures;
            if (!rep.first_bad_row) {
                rep.first_bad_row = i;
                rep.first_bad_reason = why;
            }
        }
    }
    return rep;
}

int run_verify(const RunConfig& cfg, const std::string& csv_path, std::ostream& log)
{
    const auto inst = resolve(cfg);
    const auto rows = read_csv(csv_path);
    const auto rep = verify_rows(inst, rows);
    log << "rows " << rep.rows << ", failures " << rep.failures << "\n"
        << "max solvability " << format_number(rep.max_solvability) << ", plane " << format_number(rep.max_plane)
        << ", derivatives " << format_number(rep.max_derivative) << "\n"
        << "max X deviation " << format_number(rep.max_x_deviation) << ", conic center distance "
        << format_number(rep.max_center_distance) << ", Delta deviation " << format_number(rep.max_delta_deviation)
        << "\n";
    if (rep.first_bad_row) log << "first failing row " << *rep.first_bad_row << ": " << rep.first_bad_reason << "\n";
    log << (rep.pass() ? "PASS" : "FAIL") << "\n";
    return rep.pass() ? exit_ok : exit_verify_failed;
}

std::pair<std::vector<double>, std::vector<double>> parse_pair(const std::string& text, int dim)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_number(item));
    if (static_cast<int>(v.size()) != 2 * dim)
        throw Error(ErrorKind::config, "--pair needs " + std::to_string(2 * dim) + " comma-separated numbers");
    const auto mid = v.begin() + dim;
    return {{v.begin(), mid}, {mid, v.end()}};
}

json normal_form_report(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2)
{
    const auto sol = diagnose(inst, p1, p2);
    const auto nf = normal_form(sol);
    const auto& c = nf.coefficients;
    return {{"pair", pair_json(sol)},
            {"p", c.p},
            {"epsilon", c.epsilon},
            {"epsilon_mismatch", nf.epsilon_mismatch},
            {"a", c.a},
            {"b", c.b},
            {"delta", c.delta},
            {"third_order_1", {c.a0, c.a1, c.a2, c.a3}},
            {"third_order_2", {c.b0, c.b1, c.b2, c.b3}},
            {"x_image", vec_json(nf.x_image)},
            {"map", {{"linear", mat_json(nf.map.linear)}, {"translation", vec_json(nf.map.translation)}}}};
}

json conic_report(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2)
{
    const auto sol = diagnose(inst, p1, p2);
    const auto rep = contact_conic(sol);
    const auto& k = rep.conic;
    return {{"pair", pair_json(sol)},
            {"coefficients", k.coefficients},
            {"plane", {{"origin", vec_json(k.plane.origin)}, {"e1", vec_json(k.plane.e1)}, {"e2", vec_json(k.plane.e2)}}},
            {"class", to_string(k.conic_class)},
            {"center", k.center ? vec_json(*k.center) : json(nullptr)},
            {"center_distance", rep.center_distance},
            {"null_dim", rep.null_dim},
            {"contact_det", rep.contact_det},
            {"singular_values", rep.singular_values},
            {"third_order", {rep.third1, rep.third2}}};
}

json regularity_report(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2)
{
    const auto sol = diagnose(inst, p1, p2);
    const auto d = delta(inst.s1, inst.s2, sol);
    json out = {{"pair", pair_json(sol)}, {"jg1", mat_json(d.jg1)}, {"delta", d.delta}, {"smooth", d.smooth}};
    if (inst.s1.dim() == 2) {
        const auto nf = normal_form(sol);
        std::optional<ContactReport> contact;
        try {
            contact = contact_conic(sol);
        } catch (const Error&) {
        }
        const auto sc = special_case_report(nf, contact);
        out["normal_form"] = {
            {"jg1_printed", mat_json(jg1_closed_form(nf.coefficients))},
            {"jg1_general", mat_json(jg1_closed_form_general(nf.coefficients))},
            {"quadric_case", sc.quadric_case},
            {"plain_cubic_case", sc.plain_cubic_case},
            {"prefactors", {sc.prefactor1, sc.prefactor2}},
            {"delta_factor", sc.delta_factor},
            {"delta1", {{"a2", sc.delta1_a2}, {"a3", sc.delta1_a3}}},
            {"delta2", {{"b2", sc.delta2_b2}, {"b3", sc.delta2_b3}}},
            {"quadric_symbol", sc.quadric_symbol},
            {"closed_form_det", sc.closed_form_det},
            {"general_det", sc.general_det},
            {"numeric_det", sc.numeric_det},
            {"verdict_consistent", sc.verdict_consistent}};
    }
    return out;
}

} // namespace emh::cli
