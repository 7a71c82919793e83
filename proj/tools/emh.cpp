#include "emh/cli/commands.hpp"
#include "emh/error.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace emh;
using namespace emh::cli;

namespace {

struct Flags {
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<std::string> grid;
    std::string format = "csv";
};

void add_solver_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--tol", f.tol, "Newton tolerance on the solvability residual");
    cmd->add_option("--max-iter", f.max_iter, "Newton iteration limit per seed");
    cmd->add_option("--grid", f.grid, "seed counts n1xn2[,n3xn4]");
}

RunConfig load(const std::string& path, const Flags& f)
{
    RunConfig cfg = load_config(path);
    apply_overrides(cfg, {f.tol, f.max_iter, f.grid});
    return cfg;
}

int run_pair_report(const std::string& what, const std::string& path, const std::string& pair, const Flags& f)
{
    const auto inst = resolve(load(path, f));
    const auto [p1, p2] = parse_pair(pair, inst.s1.dim());
    nlohmann::json rep;
    if (what == "normal-form") rep = normal_form_report(inst, p1, p2);
    else if (what == "conic") rep = conic_report(inst, p1, p2);
    else rep = regularity_report(inst, p1, p2);
    std::cout << rep.dump(2) << "\n";
    return exit_ok;
}

int run_scenario(const std::string& name, const std::string& out_dir, const Flags& f)
{
    RunConfig cfg;
    cfg.scenario = name;
    cfg.source = "scenario:" + name;
    apply_overrides(cfg, {f.tol, f.max_iter, f.grid});
    const auto o = solve(cfg, true);
    if (!out_dir.empty()) {
        const auto base = (std::filesystem::path(out_dir) / name).string();
        write_outputs(o, {base + ".csv", base + ".obj", base + ".json"});
    }
    std::cout << name << ": " << o.set.seeds.size() << " seeds, " << o.set.solutions.size() << " solutions, "
              << o.seconds << " s\n";
    bool all = true;
    for (const auto& p : o.properties) {
        all = all && p.pass;
        std::cout << "  " << (p.pass ? "PASS " : "FAIL ") << p.name << " = " << format_number(p.value) << " (tol "
                  << p.tolerance << "; " << p.detail << ")\n";
    }
    if (o.set.solutions.empty()) return exit_no_solutions;
    return all ? exit_ok : exit_verify_failed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Envelope of mid-hyperplanes of two curves or surfaces"};
    app.require_subcommand(1);
    Flags flags;
    std::string config, input, pair, scenario_name, out_dir;

    auto* solve_cmd = app.add_subcommand("solve", "sweep seed pairs and write the envelope points");
    solve_cmd->add_option("--config", config, "YAML configuration")->required();
    solve_cmd->add_option("--format", flags.format, "stdout format")->check(CLI::IsMember({"csv", "obj", "json"}));
    add_solver_flags(solve_cmd, flags);

    auto* verify_cmd = app.add_subcommand("verify", "re-check a solution CSV against the configuration");
    verify_cmd->add_option("--config", config, "YAML configuration")->required();
    verify_cmd->add_option("--input", input, "CSV written by solve")->required();
    add_solver_flags(verify_cmd, flags);

    auto* scenario_cmd = app.add_subcommand("scenario", "built-in scenarios");
    scenario_cmd->require_subcommand(1);
    auto* list_cmd = scenario_cmd->add_subcommand("list", "list scenarios and their parameters");
    auto* run_cmd = scenario_cmd->add_subcommand("run", "run a scenario and check its expected properties");
    run_cmd->add_option("name", scenario_name, "scenario name")->required();
    run_cmd->add_option("--out", out_dir, "directory for <name>.csv/.obj/.json");
    add_solver_flags(run_cmd, flags);

    std::map<std::string, CLI::App*> pair_cmds;
    for (const char* name : {"normal-form", "conic", "regularity"}) {
        auto* c = app.add_subcommand(name, std::string(name) + " report for one pair");
        c->add_option("--config", config, "YAML configuration")->required();
        c->add_option("--pair", pair, "u1,v1,u2,v2 (t1,t2 for curves)")->required();
        add_solver_flags(c, flags);
        pair_cmds[name] = c;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(load(config, flags), std::cerr, &std::cout, flags.format);
        if (verify_cmd->parsed()) return run_verify(load(config, flags), input, std::cout);
        if (list_cmd->parsed()) {
            for (const auto& s : scenario_library()) {
                std::cout << s.name << "  " << s.description << "\n   ";
                for (const auto& [k, v] : s.defaults) std::cout << " " << k << "=" << v;
                std::cout << "\n";
            }
            return exit_ok;
        }
        if (run_cmd->parsed()) return run_scenario(scenario_name, out_dir, flags);
        for (const auto& [name, c] : pair_cmds)
            if (c->parsed()) return run_pair_report(name, config, pair, flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
