#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emh/cli/commands.hpp"
#include "emh/error.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

using namespace emh;
using namespace emh::cli;

namespace {

const char* const nf_yaml = R"(surfaces:
  - graph: "1 - u - u^2 + v^2"
    variables: [u, v]
    domain: [[-0.5, 0.5], [-0.5, 0.5]]
  - graph: "-1 + u + u^2 + v^2"
    variables: [u, v]
    domain: [[-0.5, 0.5], [-0.5, 0.5]]
solver:
  grid1:
    box: [[-0.2, 0.2], [-0.2, 0.2]]
    counts: [5, 5]
)";

std::string message_of(const std::string& yaml)
{
    try {
        parse_config(yaml, "run.yaml");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    return "";
}

RunConfig scenario_config(const std::string& name, std::map<std::string, double> params = {})
{
    RunConfig cfg;
    cfg.scenario = name;
    cfg.parameters = std::move(params);
    return cfg;
}

// Small grids keep the per-scenario round trips quick.
const std::map<std::string, std::map<std::string, double>> small = {
    {"normal-form", {{"n", 3}}},
    {"mirror", {{"n", 4}}},
    {"counterexample", {{"n_t", 4}, {"n_theta", 5}}},
    {"conic-curve", {{"n", 8}}},
    {"generic", {}},
};

} // namespace

TEST_CASE("numbers and grid specs")
{
    CHECK(parse_number("0.1") == 0.1);
    CHECK(parse_number("-2.5e-3") == -2.5e-3);
    CHECK(parse_number("2*pi") == doctest::Approx(2 * std::numbers::pi).epsilon(1e-15));
    CHECK_THROWS_AS(parse_number("1/0"), Error);
    CHECK_THROWS_AS(parse_number("x + 1"), Error);

    auto [g1, g2] = parse_grid_spec("4x5");
    CHECK(g1 == std::vector<int>{4, 5});
    CHECK(g2 == g1);
    std::tie(g1, g2) = parse_grid_spec("2x3,6x7");
    CHECK(g1 == std::vector<int>{2, 3});
    CHECK(g2 == std::vector<int>{6, 7});
    CHECK(parse_grid_spec("12").first == std::vector<int>{12});
    CHECK_THROWS_AS(parse_grid_spec("4y5"), Error);
    CHECK_THROWS_AS(parse_grid_spec("4x"), Error);
}

TEST_CASE("config errors carry the line")
{
    CHECK(message_of("surfaces:\n  - graph: \"u\"\n    variabls: [u]\n").find("run.yaml:3:") != std::string::npos);
    CHECK(message_of("scenario: mirror\nsolver:\n  tolerance: 1e-10\n  damping: [1]\n").find("run.yaml:4:") !=
          std::string::npos);
    CHECK(message_of("scenario: mirror\nsolver: {grid1: {box: [[0, 1]], counts: [2, 3]}}\n").find("run.yaml:2:") !=
          std::string::npos);
    CHECK(message_of("surfaces: [\n").find("run.yaml:") != std::string::npos);
    CHECK(message_of("surfaces:\n  - graph: \"u +* v\"\n    variables: [u, v]\n").find("run.yaml:2:") !=
          std::string::npos);

    // structural errors
    CHECK_FALSE(message_of("").empty());
    CHECK(message_of("surfaces:\n  - graph: \"u\"\n    variables: [u]\n").find("two surfaces") != std::string::npos);
    CHECK(message_of(std::string("scenario: mirror\n") + nf_yaml).find("not both") != std::string::npos);
    CHECK(message_of(std::string(nf_yaml) + "parameters: {p: 1}\n").find("scenarios only") != std::string::npos);
    CHECK_THROWS_AS(resolve(parse_config("scenario: mirror\nparameters: {nope: 1}\n")), Error);
    CHECK_THROWS_AS(resolve(parse_config("scenario: nothing\n")), Error);
    CHECK_THROWS_AS(resolve(parse_config("scenario: normal-form\nparameters: {p: 1}\n")), Error);
}

TEST_CASE("solver block overlays the scenario defaults")
{
    const auto inst = resolve(parse_config("scenario: normal-form\nsolver: {tolerance: 1e-12, threads: 2}\n"));
    CHECK(inst.solver.tolerance == 1e-12);
    CHECK(inst.solver.threads == 2);
    CHECK(inst.solver.grid1.counts == std::vector<int>{5, 5});
    CHECK(inst.solver.grid1.box[0].lo == -0.2);

    RunConfig cfg = parse_config("scenario: normal-form\n");
    apply_overrides(cfg, {1e-11, 7, std::string("3x3,4x4")});
    const auto o = resolve(cfg);
    CHECK(o.solver.tolerance == 1e-11);
    CHECK(o.solver.max_iterations == 7);
    CHECK(o.solver.grid2.counts == std::vector<int>{4, 4});

    // Without a box the grid covers the surface domain.
    const auto d = resolve(parse_config(
        "surfaces:\n"
        "  - {parametric: [\"cos(t)\", \"sin(t)\"], variables: [t], domain: [[0, 2*pi]]}\n"
        "  - {parametric: [\"cos(t)\", \"sin(t)\"], variables: [t], domain: [[0, 2*pi]]}\n"));
    CHECK(d.solver.grid1.counts == std::vector<int>{6});
    CHECK(d.solver.grid1.box[0].hi == doctest::Approx(2 * std::numbers::pi));
}

TEST_CASE("csv round trip keeps every digit")
{
    const auto o = solve(parse_config(nf_yaml));
    REQUIRE(o.set.solutions.size() > 0);
    const auto rows = csv_rows(o.set);
    const auto text = to_csv(rows);
    const auto back = parse_csv(text);
    REQUIRE(back.size() == rows.size());
    CHECK(to_csv(back) == text);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].seed_index == rows[i].seed_index);
        for (Eigen::Index k = 0; k < 3; ++k)
            CHECK(std::abs(back[i].x(k) - rows[i].x(k)) <= 1e-15 * std::abs(rows[i].x(k)));
        CHECK(back[i].delta == rows[i].delta);
        CHECK(back[i].conic_class == rows[i].conic_class);
    }
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-1.0) == "-1");
}

TEST_CASE("normal-form solve has the worked example row")
{
    const auto o = solve(scenario_config("normal-form"), true);
    bool found = false;
    for (const auto& r : csv_rows(o.set))
        if (std::abs(r.x(0) + 1) < 1e-10 && std::abs(r.x(1)) < 1e-10 && std::abs(r.x(2)) < 1e-10) {
            found = true;
            CHECK(r.conic_class == ConicClass::ellipse);
        }
    CHECK(found);
    for (const auto& p : o.properties) CHECK_MESSAGE(p.pass, p.name << ": " << p.detail);
}

TEST_CASE("curves leave the v and z columns empty")
{
    const auto o = solve(scenario_config("conic-curve", {{"n", 6}}));
    const auto text = to_csv(csv_rows(o.set));
    std::istringstream in(text);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    std::vector<std::string> f;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) f.push_back(item);
    REQUIRE(f.size() >= 8);
    CHECK(f[2].empty());
    CHECK(f[4].empty());
    CHECK(f[7].empty());
    CHECK(verify_rows(o.instance, parse_csv(text)).pass());
}

TEST_CASE("verify passes on solve output for every scenario")
{
    for (const auto& s : scenario_library()) {
        CAPTURE(s.name);
        const auto o = solve(scenario_config(s.name, small.at(s.name)));
        REQUIRE(o.set.solutions.size() > 0);
        const auto rep = verify_rows(o.instance, parse_csv(to_csv(csv_rows(o.set))));
        CHECK(rep.rows == o.set.solutions.size());
        CHECK_MESSAGE(rep.pass(), rep.first_bad_reason);
    }
}

TEST_CASE("verify flags a corrupted X column with its row")
{
    const auto o = solve(parse_config(nf_yaml));
    auto rows = csv_rows(o.set);
    REQUIRE(rows.size() > 3);
    rows[3].x(0) += 1e-5;
    const auto rep = verify_rows(o.instance, parse_csv(to_csv(rows)));
    CHECK_FALSE(rep.pass());
    CHECK(rep.failures == 1);
    REQUIRE(rep.first_bad_row);
    CHECK(*rep.first_bad_row == 3);
    CHECK(rep.first_bad_reason.find("X deviates") != std::string::npos);

    rows = csv_rows(o.set);
    rows[1].p2[0] += 1e-3; // no longer a solution
    const auto rep2 = verify_rows(o.instance, rows);
    REQUIRE(rep2.first_bad_row);
    CHECK(*rep2.first_bad_row == 1);
}

TEST_CASE("malformed csv")
{
    const std::string h = std::string(csv_header) + "\n";
    CHECK_THROWS_AS(parse_csv(""), Error);
    CHECK_THROWS_AS(parse_csv("a,b\n"), Error);
    try {
        parse_csv(h + "0,1,2,3,4,5,6,7,8,9,,,,,\n0,1,2,3\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv(h + "0,1,2,3,4,5,6,abc,8,9,,,,,\n"), Error);
    CHECK_THROWS_AS(parse_csv(h + "0,1,2,3,4,5,6,7,8,9,,maybe,,,\n"), Error);
    CHECK(parse_csv(h).empty());
}

TEST_CASE("empty grid exits with no solutions")
{
    RunConfig cfg = parse_config(nf_yaml);
    apply_overrides(cfg, {std::nullopt, std::nullopt, std::string("0x0")});
    std::ostringstream log;
    CHECK(run_solve(cfg, log) == exit_no_solutions);
    CHECK(run_solve(parse_config(nf_yaml), log) == exit_ok);
}

TEST_CASE("files are written atomically and verified from disk")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "emh_cli_test";
    fs::remove_all(dir);
    RunConfig cfg = parse_config(nf_yaml);
    cfg.outputs = {(dir / "out.csv").string(), (dir / "out.obj").string(), (dir / "out.json").string()};
    std::ostringstream log;
    REQUIRE(run_solve(cfg, log) == exit_ok);
    for (const char* f : {"out.csv", "out.obj", "out.json"}) {
        CHECK(fs::exists(dir / f));
        CHECK_FALSE(fs::exists(dir / (std::string(f) + ".tmp")));
    }
    const auto obj = read_file((dir / "out.obj").string());
    CHECK(obj.find("\nv ") != std::string::npos);
    CHECK(obj.find("\nf ") == std::string::npos);
    const auto report = nlohmann::json::parse(read_file((dir / "out.json").string()));
    CHECK(report["solutions"].get<std::size_t>() == read_csv((dir / "out.csv").string()).size());
    CHECK(run_verify(cfg, (dir / "out.csv").string(), log) == exit_ok);

    auto text = read_file((dir / "out.csv").string());
    const auto pos = text.find("\n", text.find("\n") + 1) + 1; // second data row
    const auto comma = [&](std::size_t from, int k) {
        for (int i = 0; i < k; ++i) from = text.find(',', from) + 1;
        return from;
    };
    const auto xs = comma(pos, 5), xe = text.find(',', xs);
    text.replace(xs, xe - xs, "0.5");
    write_file_atomic((dir / "bad.csv").string(), text);
    std::ostringstream out;
    CHECK(run_verify(cfg, (dir / "bad.csv").string(), out) == exit_verify_failed);
    CHECK(out.str().find("first failing row 1") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("generic scenario matches the golden file")
{
    const auto golden = read_csv(EMH_GOLDEN_DIR "/generic.csv");
    const auto o = solve(scenario_config("generic"), true);
    const auto rows = csv_rows(o.set);
    REQUIRE(rows.size() == golden.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CAPTURE(i);
        CHECK(rows[i].seed_index == golden[i].seed_index);
        CHECK((rows[i].x - golden[i].x).norm() <= 1e-9 * (1.0 + golden[i].x.norm()));
        for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(rows[i].p2[k] - golden[i].p2[k]) <= 1e-9);
        REQUIRE(golden[i].delta);
        CHECK(*rows[i].delta == doctest::Approx(*golden[i].delta).epsilon(1e-6));
        CHECK(rows[i].conic_class == golden[i].conic_class);
    }
    for (const auto& p : o.properties) CHECK_MESSAGE(p.pass, p.name << ": " << p.detail);
}

TEST_CASE("scenario properties")
{
    auto results = [](const std::string& name) {
        std::map<std::string, PropertyResult> out;
        const auto o = solve(scenario_config(name, small.at(name)), true);
        for (const auto& p : o.properties) out[p.name] = p;
        return out;
    };
    auto conic = results("conic-curve");
    CHECK(conic["emh-is-center"].pass);
    CHECK(conic["linear-oracle"].pass);

    auto mirror = results("mirror");
    CHECK(mirror["mirror-branch-in-plane"].pass);
    CHECK(mirror["mirror-branch-reflection-pattern"].pass);
    CHECK(mirror["conic-centers"].pass);

    auto ce = results("counterexample");
    CHECK(ce["h-orthogonality"].pass);
    CHECK(ce["h-orthogonality"].value < 1e-10);
    CHECK(ce["corresponding-branch-in-plane-z0"].pass);
    CHECK(ce["no-reflection-evidence"].pass);
    CHECK(ce["conic-centers"].pass);
}

TEST_CASE("pair reports")
{
    const auto inst = resolve(parse_config(nf_yaml));
    const auto [p1, p2] = parse_pair("0,0,0,0", 2);
    const auto nf = normal_form_report(inst, p1, p2);
    CHECK(nf["p"].get<double>() == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(nf["epsilon"].get<int>() == 1);
    const auto conic = conic_report(inst, p1, p2);
    CHECK(conic["class"] == "ellipse");
    CHECK(conic["center_distance"].get<double>() < 1e-8);
    const auto reg = regularity_report(inst, p1, p2);
    CHECK(reg["delta"].get<double>() == doctest::Approx(432.0).epsilon(1e-3));
    CHECK(reg["normal_form"]["general_det"].get<double>() == doctest::Approx(432.0).epsilon(1e-9));
    CHECK_THROWS_AS(parse_pair("0,0,0", 2), Error);
}
