#pragma once

#include "emh/cli/config.hpp"
#include "emh/cli/io.hpp"
#include "emh/cli/scenarios.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace emh::cli {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_no_solutions = 2, exit_verify_failed = 3 };

/// Surfaces and solver settings of a config, with the scenario resolved. A grid
/// without a box covers the surface domain (6 nodes per parameter by default).
ScenarioInstance resolve(const RunConfig& cfg);

/// Command-line flags layered over the config's solver block.
struct Overrides {
    std::optional<double> tolerance;
    std::optional<int> max_iterations;
    std::optional<std::string> grid; // "n1xn2[,n3xn4]"
};
void apply_overrides(RunConfig& cfg, const Overrides& o);

struct SolveOutcome {
    ScenarioInstance instance;
    SolutionSet set;
    std::vector<PropertyResult> properties; // scenario runs only
    nlohmann::json report;
    double seconds = 0.0;
};

SolveOutcome solve(const RunConfig& cfg, bool check_scenario_properties = false);

/// format: csv, obj or json.
std::string render(const SolveOutcome& o, const std::string& format);
void write_outputs(const SolveOutcome& o, const OutputSpec& out);

/// Writes the artifacts listed in cfg.outputs (and `format` to `out` when given);
/// returns exit_ok or exit_no_solutions.
int run_solve(const RunConfig& cfg, std::ostream& log, std::ostream* out = nullptr, const std::string& format = "csv");

struct VerifyReport {
    std::size_t rows = 0;
    std::size_t failures = 0;
    std::optional<std::size_t> first_bad_row; // 0-based data row
    std::string first_bad_reason;
    double max_solvability = 0.0, max_plane = 0.0, max_derivative = 0.0;
    double max_x_deviation = 0.0;    // |X_csv - X_recomputed| / (1 + |X|)
    double max_center_distance = 0.0;
    double max_delta_deviation = 0.0; // relative
    bool pass() const { return failures == 0; }
};

VerifyReport verify_rows(const ScenarioInstance& inst, const std::vector<CsvRow>& rows);
int run_verify(const RunConfig& cfg, const std::string& csv_path, std::ostream& log);

/// Parses "u1,v1,u2,v2" (or "t1,t2" for curves).
std::pair<std::vector<double>, std::vector<double>> parse_pair(const std::string& text, int dim);

nlohmann::json normal_form_report(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2);
nlohmann::json conic_report(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2);
nlohmann::json regularity_report(const ScenarioInstance& inst, std::span<const double> p1, std::span<const double> p2);

} // namespace emh::cli
