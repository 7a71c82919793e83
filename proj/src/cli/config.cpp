#include "emh/cli/config.hpp"

#include "emh/error.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace emh::cli {

namespace {

[[noreturn]] void fail(const std::string& source, const YAML::Node& node, const std::string& what)
{
    const auto mark = node.Mark();
    std::string where = source;
    if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
    throw Error(ErrorKind::config, where + ": " + what);
}

void check_keys(const std::string& source, const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& section)
{
    if (!map.IsMap()) fail(source, map, section + " must be a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(source, kv.first, "unknown key '" + key + "' in " + section);
    }
}

double number(const std::string& source, const YAML::Node& node, const std::string& what)
{
    if (!node.IsScalar()) fail(source, node, what + " must be a number");
    try {
        return parse_number(node.Scalar());
    } catch (const Error& e) {
        fail(source, node, what + ": " + e.what());
    }
}

int integer(const std::string& source, const YAML::Node& node, const std::string& what)
{
    const double v = number(source, node, what);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(source, node, what + " must be an integer");
    return static_cast<int>(v);
}

bool boolean(const std::string& source, const YAML::Node& node, const std::string& what)
{
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        fail(source, node, what + " must be true or false");
    }
}

std::vector<std::string> strings(const std::string& source, const YAML::Node& node, const std::string& what)
{
    if (!node.IsSequence()) fail(source, node, what + " must be a list");
    std::vector<std::string> out;
    for (const auto& n : node) {
        if (!n.IsScalar()) fail(source, n, what + " entries must be strings");
        out.push_back(n.Scalar());
    }
    return out;
}

std::vector<Interval> box(const std::string& source, const YAML::Node& node, const std::string& what)
{
    if (!node.IsSequence()) fail(source, node, what + " must be a list of [lo, hi] pairs");
    std::vector<Interval> out;
    for (const auto& iv : node) {
        if (!iv.IsSequence() || iv.size() != 2) fail(source, iv, what + " entries must be [lo, hi]");
        const double lo = number(source, iv[0], what), hi = number(source, iv[1], what);
        if (!(hi >= lo)) fail(source, iv, what + " interval has lo > hi");
        out.push_back({lo, hi});
    }
    return out;
}

Surface surface(const std::string& source, const YAML::Node& node)
{
    check_keys(source, node, {"graph", "parametric", "variables", "domain"}, "surface");
    if (!node["variables"]) fail(source, node, "surface needs 'variables'");
    const auto vars = strings(source, node["variables"], "variables");
    std::vector<Interval> domain;
    if (node["domain"]) {
        domain = box(source, node["domain"], "domain");
        if (domain.size() != vars.size()) fail(source, node["domain"], "domain needs one interval per variable");
    }
    auto expr = [&](const YAML::Node& n) {
        if (!n.IsScalar()) fail(source, n, "formula must be a string");
        try {
            return Expression::parse(n.Scalar(), vars);
        } catch (const Error& e) {
            fail(source, n, e.what());
        }
    };
    try {
        if (node["graph"] && !node["parametric"]) return Surface::graph(expr(node["graph"]), domain);
        if (node["parametric"] && !node["graph"]) {
            const auto& list = node["parametric"];
            if (!list.IsSequence()) fail(source, list, "parametric must be a list of formulas");
            std::vector<Expression> comps;
            for (const auto& c : list) comps.push_back(expr(c));
            return Surface::parametric(std::move(comps), domain);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        fail(source, node, e.what());
    }
    fail(source, node, "surface needs exactly one of 'graph' or 'parametric'");
}

SeedGrid grid(const std::string& source, const YAML::Node& node, const std::string& what)
{
    check_keys(source, node, {"box", "counts"}, what);
    if (!node["box"] || !node["counts"]) fail(source, node, what + " needs 'box' and 'counts'");
    SeedGrid g;
    g.box = box(source, node["box"], what + ".box");
    if (!node["counts"].IsSequence()) fail(source, node["counts"], what + ".counts must be a list");
    for (const auto& c : node["counts"]) g.counts.push_back(integer(source, c, what + ".counts"));
    if (g.counts.size() != g.box.size()) fail(source, node, what + ": box and counts differ in length");
    return g;
}

SolverConfig solver(const std::string& source, const YAML::Node& node, SolverConfig s = {})
{
    check_keys(source, node,
               {"tolerance", "max_iterations", "damping", "max_halvings", "transversality_min", "dedup_radius",
                "grid1", "grid2", "periods", "threads", "diagnostics", "jet_order"},
               "solver");
    if (node["tolerance"]) s.tolerance = number(source, node["tolerance"], "tolerance");
    if (node["max_iterations"]) s.max_iterations = integer(source, node["max_iterations"], "max_iterations");
    if (node["damping"]) s.damping = number(source, node["damping"], "damping");
    if (node["max_halvings"]) s.max_halvings = integer(source, node["max_halvings"], "max_halvings");
    if (node["transversality_min"]) s.transversality_min = number(source, node["transversality_min"], "transversality_min");
    if (node["dedup_radius"]) s.dedup_radius = number(source, node["dedup_radius"], "dedup_radius");
    if (node["threads"]) s.threads = integer(source, node["threads"], "threads");
    if (node["diagnostics"]) s.diagnostics = boolean(source, node["diagnostics"], "diagnostics");
    if (node["jet_order"]) s.jet_order = integer(source, node["jet_order"], "jet_order");
    if (node["grid1"]) s.grid1 = grid(source, node["grid1"], "grid1");
    if (node["grid2"]) s.grid2 = grid(source, node["grid2"], "grid2");
    else if (node["grid1"]) s.grid2 = s.grid1;
    if (node["periods"]) {
        if (!node["periods"].IsSequence()) fail(source, node["periods"], "periods must be a list");
        s.periods.clear();
        for (const auto& p : node["periods"]) s.periods.push_back(number(source, p, "periods"));
    }
    return s;
}

YAML::Node load_yaml(const std::string& text, const std::string& source)
{
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw Error(ErrorKind::config, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

} // namespace

double parse_number(const std::string& text)
{
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec == std::errc() && ptr == e) return v;
    // Constant formula, e.g. "2*pi".
    const Expression ex = Expression::parse(text, {"pi"});
    const double at[] = {std::numbers::pi};
    v = ex.evaluate(at);
    if (!std::isfinite(v)) throw Error(ErrorKind::config, "'" + text + "' is not a finite number");
    return v;
}

std::pair<std::vector<int>, std::vector<int>> parse_grid_spec(const std::string& spec)
{
    auto counts = [&](const std::string& part) {
        std::vector<int> out;
        if (part.empty() || part.back() == 'x') throw Error(ErrorKind::config, "bad grid spec '" + spec + "'");
        std::stringstream ss(part);
        std::string item;
        while (std::getline(ss, item, 'x')) {
            int v = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || ptr != item.data() + item.size() || v < 0)
                throw Error(ErrorKind::config, "bad grid spec '" + spec + "' (expected n1xn2[,n3xn4])");
            out.push_back(v);
        }
        if (out.empty()) throw Error(ErrorKind::config, "bad grid spec '" + spec + "'");
        return out;
    };
    const auto comma = spec.find(',');
    if (comma == std::string::npos) {
        auto g = counts(spec);
        return {g, g};
    }
    return {counts(spec.substr(0, comma)), counts(spec.substr(comma + 1))};
}

RunConfig parse_config(const std::string& text, const std::string& source)
{
    const YAML::Node root = load_yaml(text, source);
    RunConfig cfg;
    cfg.source = source;
    if (!root || root.IsNull()) throw Error(ErrorKind::config, source + ": empty configuration");
    check_keys(source, root, {"scenario", "parameters", "surfaces", "solver", "outputs"}, "configuration");

    if (root["scenario"]) {
        if (!root["scenario"].IsScalar()) fail(source, root["scenario"], "scenario must be a name");
        cfg.scenario = root["scenario"].Scalar();
    }
    if (root["parameters"]) {
        const auto& params = root["parameters"];
        if (!params.IsMap()) fail(source, params, "parameters must be a mapping");
        for (const auto& kv : params) cfg.parameters[kv.first.as<std::string>()] = number(source, kv.second, kv.first.as<std::string>());
    }
    if (root["surfaces"]) {
        const auto& list = root["surfaces"];
        if (!list.IsSequence()) fail(source, list, "surfaces must be a list");
        for (const auto& s : list) cfg.surfaces.push_back(surface(source, s));
    }
    if (cfg.scenario && !cfg.surfaces.empty()) fail(source, root["surfaces"], "give either a scenario or surfaces, not both");
    if (!cfg.scenario) {
        if (cfg.surfaces.size() != 2) fail(source, root, "exactly two surfaces are required without a scenario");
        if (cfg.surfaces[0].dim() != cfg.surfaces[1].dim() || cfg.surfaces[0].ambient_dim() != cfg.surfaces[1].ambient_dim())
            fail(source, root["surfaces"], "surfaces differ in dimension");
        if (cfg.surfaces[0].ambient_dim() > 3) fail(source, root["surfaces"], "only curves in R^2 and surfaces in R^3 are supported");
        if (!cfg.parameters.empty()) fail(source, root["parameters"], "parameters apply to scenarios only");
    }
    if (root["solver"]) {
        const YAML::Node node = root["solver"];
        solver(source, node); // report errors now, with line numbers
        cfg.solver_overlay = [source, node](const SolverConfig& base) { return solver(source, node, base); };
    }
    if (root["outputs"]) {
        const auto& out = root["outputs"];
        check_keys(source, out, {"csv", "obj", "json"}, "outputs");
        if (out["csv"]) cfg.outputs.csv = out["csv"].Scalar();
        if (out["obj"]) cfg.outputs.obj = out["obj"].Scalar();
        if (out["json"]) cfg.outputs.json = out["json"].Scalar();
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

SolverConfig parse_solver(const std::string& text, const std::string& source)
{
    return solver(source, load_yaml(text, source));
}

} // namespace emh::cli
